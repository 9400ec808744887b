# -*- coding: utf-8 -*-
"""
Trajectory-Based Routing Package
================================

This package learns routing preferences from historical map-matched
trajectories and uses them to answer routing queries on a road network.

Modules:
--------
- netmodel: Road network, paths, cost features
- search: Label-settling shortest path engine
- ingest: CSV/JSONL loading and writing, synthetic grid worlds
- clustering: Modularity-based bottom-up region clustering
- region_graph: T-edges, B-edges, transfer centers, inner paths
- preference: Preference vectors, path similarity, preference learning
- transfer: Graph-based preference transfer to B-edges
- apply_pref: Preference-constrained search and B-edge population
- router: Region-graph routing and query cases
- evaluation: Train/test split, baselines, reports
- artifact: Model file I/O
- config: Configuration and config files
- monitoring: Solver monitoring and pipeline statistics
- parallel, thread_utils: Worker pools and thread-safe output
- file_handler: Fingerprints and file hashes
- utils: Shared utility functions

Usage Example:
-------------
    from trajroute.ingest import load_road_network, load_trajectories
    from trajroute.clustering import build_trajectory_graph, bottom_up_clustering
    from trajroute.region_graph import build_region_graph
    from trajroute.router import route

    net = load_road_network("nodes.csv", "edges.csv")
    trajectories, _ = load_trajectories("trajectories.jsonl", net)
    regions = bottom_up_clustering(build_trajectory_graph(net, trajectories))
    model = build_region_graph(net, regions, trajectories)
    result = route(model, net, 0, 42)
"""

__version__ = "1.0.0"

# Main exports for convenience
from .config import parse_config, Config
from .netmodel import (
    CostKind,
    RoadType,
    FuelModel,
    Path,
    Trajectory,
    RoadNetwork,
    NoPathError,
    PathValidationError,
    path_cost,
    validate_path,
)
from .ingest import (
    DataFormatError,
    load_road_network,
    load_trajectories,
    generate_synthetic,
    SyntheticConfig,
)
from .clustering import build_trajectory_graph, bottom_up_clustering, modularity_gain
from .region_graph import build_region_graph, RegionGraphModel
from .preference import (
    FeatureSpace,
    PreferenceVector,
    RoadCondition,
    learn_preference,
    learn_all_preferences,
    psim_intersection,
    psim_union,
)
from .transfer import transfer_preferences, TransferSolverError, SingularSystemError
from .apply_pref import preference_dijkstra, populate_b_edge_paths
from .router import route, NoRouteError, StitchError
from .evaluation import split_train_test, evaluate, TrainingLeakError
from .artifact import save_model, load_model, ModelArtifact
from .monitoring import pipeline_stats, solver_monitor, print_summary

__all__ = [
    # Configuration
    'parse_config',
    'Config',
    # Network model
    'CostKind',
    'RoadType',
    'FuelModel',
    'Path',
    'Trajectory',
    'RoadNetwork',
    'NoPathError',
    'PathValidationError',
    'path_cost',
    'validate_path',
    # Ingestion
    'DataFormatError',
    'load_road_network',
    'load_trajectories',
    'generate_synthetic',
    'SyntheticConfig',
    # Clustering and region graph
    'build_trajectory_graph',
    'bottom_up_clustering',
    'modularity_gain',
    'build_region_graph',
    'RegionGraphModel',
    # Preferences
    'FeatureSpace',
    'PreferenceVector',
    'RoadCondition',
    'learn_preference',
    'learn_all_preferences',
    'psim_intersection',
    'psim_union',
    'transfer_preferences',
    'TransferSolverError',
    'SingularSystemError',
    'preference_dijkstra',
    'populate_b_edge_paths',
    # Routing and evaluation
    'route',
    'NoRouteError',
    'StitchError',
    'split_train_test',
    'evaluate',
    'TrainingLeakError',
    # Artifacts and monitoring
    'save_model',
    'load_model',
    'ModelArtifact',
    'pipeline_stats',
    'solver_monitor',
    'print_summary',
]
