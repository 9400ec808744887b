# -*- coding: utf-8 -*-
"""
Routing preferences: model, path similarity and learning on T-edges.

A preference pairs a master travel cost (DI, TT or FC) with an optional
slave road condition. Learning follows a coordinate-descent scheme: pick
the cost feature whose lowest-cost paths best reproduce the observed paths,
then add the road condition that strictly improves that reproduction most.
"""

from dataclasses import dataclass
from typing import Optional

from .monitoring import pipeline_stats
from .netmodel import CostKind, NoPathError, RoadType
from .parallel import SEQUENTIAL
from .search import lowest_cost_path as _search_lowest_cost_path
from .utils import is_debug_enabled


@dataclass(frozen=True)
class RoadCondition:
    """A road type, or a declared set of road types, that edges should be on."""
    road_types: frozenset

    @classmethod
    def of(cls, *road_types):
        return cls(frozenset(RoadType(rt) for rt in road_types))

    @classmethod
    def parse(cls, text):
        """
        Parse "motorway" or a '+'-joined pair such as "motorway+residential".

        Raises:
            ValueError: On an unknown road type name
        """
        parts = [p for p in str(text).split("+") if p.strip()]
        if not parts:
            raise ValueError("empty road condition")
        return cls(frozenset(RoadType.from_name(p) for p in parts))

    @property
    def label(self):
        return "+".join(rt.label for rt in sorted(self.road_types))

    def satisfied_by(self, edge):
        return edge.road_type in self.road_types

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class PreferenceVector:
    """⟨master cost feature, optional slave road condition⟩."""
    master: CostKind
    slave: Optional[RoadCondition] = None

    def features(self):
        """Feature labels of this vector, used for Jaccard accuracy."""
        labels = {CostKind(self.master).value}
        if self.slave is not None:
            labels.add(self.slave.label)
        return labels

    def to_dict(self):
        return {
            "master": CostKind(self.master).value,
            "slave": self.slave.label if self.slave is not None else None,
        }

    @classmethod
    def from_dict(cls, data):
        slave = data.get("slave")
        return cls(CostKind(data["master"]), RoadCondition.parse(slave) if slave else None)

    def __str__(self):
        return f"⟨{CostKind(self.master).value}, {self.slave.label if self.slave else 'none'}⟩"


DEFAULT_COST_FEATURES = (CostKind.DI, CostKind.TT, CostKind.FC)
DEFAULT_ROAD_CONDITIONS = tuple(RoadCondition.of(rt) for rt in RoadType)


@dataclass(frozen=True)
class FeatureSpace:
    """
    Ordered cost features and road-condition features.

    Column order is cost features first, then road conditions; p is their
    total count. List order also breaks ties everywhere.
    """
    cost_features: tuple = DEFAULT_COST_FEATURES
    road_conditions: tuple = DEFAULT_ROAD_CONDITIONS

    def __post_init__(self):
        if not self.cost_features or not self.road_conditions:
            raise ValueError("feature lists must not be empty")
        if len(set(self.cost_features)) != len(self.cost_features):
            raise ValueError("duplicate cost feature")
        if len(set(self.road_conditions)) != len(self.road_conditions):
            raise ValueError("duplicate road condition")

    @classmethod
    def from_text(cls, road_conditions="", cost_features="DI,TT,FC"):
        """
        Build from comma lists, e.g. road_conditions="motorway,residential,motorway+residential".

        An empty road_conditions string means the six road types.
        """
        costs = tuple(CostKind(c.strip().upper()) for c in cost_features.split(",") if c.strip())
        conditions = tuple(RoadCondition.parse(c) for c in road_conditions.split(",") if c.strip())
        return cls(costs or DEFAULT_COST_FEATURES, conditions or DEFAULT_ROAD_CONDITIONS)

    @property
    def p(self):
        return len(self.cost_features) + len(self.road_conditions)

    def cost_column(self, kind):
        return self.cost_features.index(CostKind(kind))

    def condition_column(self, condition):
        return len(self.cost_features) + self.road_conditions.index(condition)

    def columns(self):
        """Column labels in matrix order."""
        return [k.value for k in self.cost_features] + [c.label for c in self.road_conditions]

    def vectors(self):
        """Every preference vector, slave-free first within each master."""
        out = []
        for master in self.cost_features:
            out.append(PreferenceVector(master))
            out.extend(PreferenceVector(master, c) for c in self.road_conditions)
        return out

    def contains(self, vector):
        return vector.master in self.cost_features and (
            vector.slave is None or vector.slave in self.road_conditions)


def psim_intersection(net, truth, candidate):
    """
    Length of edges shared with the candidate over the truth path's length.

    Edges are compared by directed edge id.

    Raises:
        ValueError: If the truth path has no edges
    """
    truth_edges = set(truth.edges)
    if not truth_edges:
        raise ValueError("truth path has no edges")
    lengths = net.weights(CostKind.DI)
    shared = truth_edges & set(candidate.edges)
    return sum(lengths[e] for e in shared) / sum(lengths[e] for e in truth_edges)


def psim_union(net, truth, candidate):
    """
    Length of shared edges over the length of the union of both paths.

    Raises:
        ValueError: If both paths have no edges
    """
    truth_edges = set(truth.edges)
    candidate_edges = set(candidate.edges)
    union = truth_edges | candidate_edges
    if not union:
        raise ValueError("both paths have no edges")
    lengths = net.weights(CostKind.DI)
    shared = truth_edges & candidate_edges
    return sum(lengths[e] for e in shared) / sum(lengths[e] for e in union)


def lowest_cost_path(net, s, d, master):
    """
    Cost-minimal path under one master weight.

    Raises:
        NoPathError: If d is unreachable from s
    """
    return _search_lowest_cost_path(net, s, d, CostKind(master))


class _PathScorer:
    """Score preference vectors against the weighted paths of one T-edge, caching searches."""

    def __init__(self, net, records):
        from .apply_pref import preference_dijkstra
        self.net = net
        self.records = [r for r in records if r.path.edges]
        self._route = preference_dijkstra
        self._cache = {}

    def candidate(self, vector, s, d):
        key = (vector, s, d)
        if key not in self._cache:
            try:
                self._cache[key] = self._route(self.net, vector, s, d)
            except NoPathError:
                self._cache[key] = None
        return self._cache[key]

    def path_score(self, vector, record):
        candidate = self.candidate(vector, record.path.source, record.path.target)
        if candidate is None:
            return 0.0
        return psim_intersection(self.net, record.path, candidate)

    def score(self, vector):
        return sum(max(r.count, 1) * self.path_score(vector, r) for r in self.records)


def _records(t_edge):
    records = [r for r in t_edge.paths if r.path.edges]
    if not records:
        raise ValueError(f"region edge {t_edge.edge_id} has no paths to learn from")
    return records


def learn_preference(net, t_edge, feature_space=None):
    """
    Learn one preference vector for a T-edge.

    Stage 1 scores every cost feature by the count-weighted similarity of
    its lowest-cost paths to the observed paths and keeps the best (ties go
    to list order). Stage 2 tries each road condition as slave and keeps
    the one with the largest strict score improvement, or none.

    Args:
        net (RoadNetwork): Road network
        t_edge (RegionEdge): T-edge with observed paths
        feature_space (FeatureSpace): Candidate features (default: FeatureSpace())

    Returns:
        PreferenceVector: Learned preference

    Raises:
        ValueError: If the edge has no paths with at least one road edge
    """
    feature_space = feature_space or FeatureSpace()
    scorer = _PathScorer(net, _records(t_edge))

    master = None
    best = -1.0
    for kind in feature_space.cost_features:
        score = scorer.score(PreferenceVector(kind))
        if score > best:
            master, best = kind, score

    chosen = PreferenceVector(master)
    for condition in feature_space.road_conditions:
        vector = PreferenceVector(master, condition)
        score = scorer.score(vector)
        if score > best:
            chosen, best = vector, score

    if is_debug_enabled():
        print(f"[DEBUG] R{t_edge.from_region}->R{t_edge.to_region}: {chosen} (score {best:.4f})")
    return chosen


def exhaustive_preference(net, t_edge, feature_space=None):
    """
    Best preference over the complete master × slave space.

    Ties go to the earlier vector in FeatureSpace.vectors() order.
    """
    feature_space = feature_space or FeatureSpace()
    scorer = _PathScorer(net, _records(t_edge))
    chosen, best = None, -1.0
    for vector in feature_space.vectors():
        score = scorer.score(vector)
        if score > best:
            chosen, best = vector, score
    return chosen


def preference_diversity(net, t_edge, feature_space=None):
    """Number of distinct per-path best preferences among a T-edge's paths."""
    feature_space = feature_space or FeatureSpace()
    scorer = _PathScorer(net, _records(t_edge))
    vectors = feature_space.vectors()
    distinct = set()
    for record in scorer.records:
        best_vector, best = None, -1.0
        for vector in vectors:
            score = scorer.path_score(vector, record)
            if score > best:
                best_vector, best = vector, score
        distinct.add(best_vector)
    return len(distinct)


def learn_all_preferences(net, model, feature_space=None, runner=SEQUENTIAL, measure_diversity=True):
    """
    Learn and attach a preference to every T-edge of a model.

    Args:
        net (RoadNetwork): Road network
        model (RegionGraphModel): Model with T-edges
        feature_space (FeatureSpace): Candidate features
        runner (ParallelRunner): Executor for the per-edge learning
        measure_diversity (bool): Also count T-edges with a single per-path preference

    Returns:
        dict: {"learned": int, "single_preference": int, "single_preference_rate": float}
    """
    feature_space = feature_space or FeatureSpace()
    t_edges = [e for e in model.t_edges() if any(r.path.edges for r in e.paths)]

    def work(edge):
        vector = learn_preference(net, edge, feature_space)
        diversity = preference_diversity(net, edge, feature_space) if measure_diversity else None
        return vector, diversity

    results = runner.map(work, t_edges, label="Learn")

    single = 0
    for edge, (vector, diversity) in zip(t_edges, results):
        edge.preference = vector
        edge.preference_source = "learned"
        if diversity == 1:
            single += 1

    pipeline_stats.safe.increment('preferences_learned', len(t_edges))
    pipeline_stats.safe.increment('single_preference_t_edges', single)
    return {
        "learned": len(t_edges),
        "single_preference": single if measure_diversity else None,
        "single_preference_rate": (single / len(t_edges)) if (t_edges and measure_diversity) else None,
    }
