# -*- coding: utf-8 -*-
"""Tests for T-edges, transfer centers, inner paths and B-edges."""

import pytest

from trajroute.clustering import Region, bottom_up_clustering, build_trajectory_graph
from trajroute.ingest import SyntheticConfig, generate_synthetic
from trajroute.monitoring import pipeline_stats
from trajroute.netmodel import Trajectory, validate_path
from trajroute.region_graph import (
    B_EDGE,
    T_EDGE,
    RegionGraphModel,
    build_b_edges,
    build_region_graph,
    build_t_edges,
    extract_inner_paths,
    region_components,
)


@pytest.fixture
def line_regions(line_net):
    return [
        Region(0, (0, 1, 2), None, (116.301, 39.9)),
        Region(1, (3, 4, 5), None, (116.304, 39.9)),
        Region(2, (6, 7, 8), None, (116.307, 39.9)),
    ]


def _traj(net, vertices, traj_id=0):
    return Trajectory(traj_id, 0, 0, validate_path(net, vertices))


class TestTEdges:

    def test_crossing_trajectory(self, line_net, line_regions):
        model = build_t_edges(line_regions, [_traj(line_net, [1, 2, 3, 4, 5, 6, 7])])

        pairs = {(e.from_region, e.to_region): e for e in model.edges}
        assert set(pairs) == {(0, 1), (0, 2), (1, 2)}
        assert all(e.kind == T_EDGE for e in model.edges)
        assert pairs[(0, 1)].paths[0].path.vertices == (2, 3)
        assert pairs[(1, 2)].paths[0].path.vertices == (5, 6)
        assert pairs[(0, 2)].paths[0].path.vertices == (2, 3, 4, 5, 6)

    def test_transfer_centers_are_entries_and_exits(self, line_net, line_regions):
        model = build_t_edges(line_regions, [_traj(line_net, [1, 2, 3, 4, 5, 6, 7])])
        assert model.transfer_centers[0] == {2: 1}
        assert model.transfer_centers[1] == {3: 1, 5: 1}
        assert model.transfer_centers[2] == {6: 1}

    def test_identical_paths_aggregate(self, line_net, line_regions):
        trajectories = [_traj(line_net, [2, 3, 4], i) for i in range(3)]
        model = build_t_edges(line_regions, trajectories)
        edge = model.edge_between(0, 1)
        assert len(edge.paths) == 1
        assert edge.paths[0].count == 3
        assert model.transfer_centers[1] == {3: 3}

    def test_first_visit_order_decides_direction(self, line_net, line_regions):
        model = build_t_edges(line_regions, [_traj(line_net, [2, 3, 2])])
        assert model.edge_between(0, 1) is not None
        assert model.edge_between(1, 0) is None

    def test_entry_from_unclustered_vertex(self, line_net, line_regions):
        model = build_t_edges(line_regions, [_traj(line_net, [9, 0, 1])])
        assert model.edges == []
        assert model.transfer_centers[0] == {0: 1}

    def test_inner_paths(self, line_net, line_regions):
        inner = extract_inner_paths(line_regions, [_traj(line_net, [1, 2, 3, 4, 5, 6, 7])])
        assert [r.path.vertices for r in inner[0]] == [(1, 2)]
        assert [r.path.vertices for r in inner[1]] == [(3, 4, 5)]
        assert [r.path.vertices for r in inner[2]] == [(6, 7)]

    def test_best_inner_path_prefers_count(self, line_net, line_regions):
        model = RegionGraphModel(line_regions)
        model.add_inner_path(1, validate_path(line_net, [3, 4, 5]), count=1)
        model.add_inner_path(1, validate_path(line_net, [3, 5]), count=4)
        assert model.best_inner_path(1, 3, 5).vertices == (3, 5)
        assert model.best_inner_path(1, 5, 3) is None

    def test_self_edge_rejected(self, line_regions):
        with pytest.raises(ValueError):
            RegionGraphModel(line_regions).add_edge(1, 1, T_EDGE)


class TestBEdges:

    def test_adjacent_regions_get_missing_directions(self, line_net, line_regions):
        model = build_t_edges(line_regions, [_traj(line_net, [1, 2, 3, 4, 5, 6, 7])])
        build_b_edges(line_net, model)

        b_pairs = {(e.from_region, e.to_region) for e in model.b_edges()}
        assert b_pairs == {(1, 0), (2, 1)}
        assert all(e.paths == [] and e.kind == B_EDGE for e in model.b_edges())
        assert pipeline_stats.stats['b_edges'] == 2
        assert pipeline_stats.stats['t_edges'] == 3

    def test_search_passes_unclustered_vertices(self, line_net):
        regions = [Region(0, (0, 1), None, (116.3005, 39.9)), Region(1, (7, 8), None, (116.3075, 39.9))]
        model = build_b_edges(line_net, RegionGraphModel(regions))
        assert {(e.from_region, e.to_region) for e in model.edges} == {(0, 1), (1, 0)}

    def test_search_stops_at_foreign_region(self, line_net, line_regions):
        model = build_b_edges(line_net, RegionGraphModel(line_regions))
        assert model.edge_between(0, 2) is None
        assert region_components(model) == 1

    def test_isolated_region_is_its_own_component(self, toy_net):
        regions = [Region(0, (0, 2), None, (0.0, 0.0)), Region(1, (1,), None, (0.0, 0.0))]
        model = build_b_edges(toy_net, RegionGraphModel(regions))
        assert model.edges == []
        assert region_components(model) == 2


class TestSyntheticRegionGraph:

    def test_connected_network_gives_connected_region_graph(self):
        world = generate_synthetic(SyntheticConfig(grid_rows=6, grid_cols=6, block_size=3,
                                                   trajectory_count=50, rng_seed=2))
        net = world.network
        regions = bottom_up_clustering(build_trajectory_graph(net, world.trajectories))
        model = build_region_graph(net, regions, world.trajectories)

        assert region_components(model) == 1
        for edge in model.t_edges():
            for record in edge.paths:
                assert model.region_of[record.path.source] == edge.from_region
                assert model.region_of[record.path.target] == edge.to_region
                assert record.count >= 1
        for region_id, centers in model.transfer_centers.items():
            assert set(centers) <= set(model.region(region_id).members)
