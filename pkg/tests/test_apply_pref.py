# -*- coding: utf-8 -*-
"""Tests for the preference-constrained search and B-edge population."""

import numpy as np
import pytest

from trajroute.apply_pref import (
    capped_centers,
    populate_b_edge_paths,
    preference_dijkstra,
    preference_search,
)
from trajroute.clustering import Region
from trajroute.monitoring import pipeline_stats
from trajroute.netmodel import CostKind, NoPathError, RoadType, path_cost
from trajroute.parallel import ParallelRunner
from trajroute.preference import PreferenceVector, RoadCondition, lowest_cost_path
from trajroute.region_graph import B_EDGE, RegionGraphModel

MOTORWAY = RoadCondition.of(RoadType.MOTORWAY)


class TestPreferenceDijkstra:

    @pytest.mark.parametrize("preference, expected", [
        (PreferenceVector(CostKind.DI), (0, 6, 5)),
        (PreferenceVector(CostKind.FC), (0, 6, 5)),
        (PreferenceVector(CostKind.TT), (0, 2, 4, 5)),
        (PreferenceVector(CostKind.TT, MOTORWAY), (0, 2, 3, 5)),
        (PreferenceVector(CostKind.DI, MOTORWAY), (0, 6, 5)),
        (PreferenceVector(CostKind.TT, RoadCondition.of(RoadType.PRIMARY)), (0, 2, 4, 5)),
    ])
    def test_toy_routes(self, toy_net, preference, expected):
        assert preference_dijkstra(toy_net, preference, 0, 5).vertices == expected

    def test_pruning_only_where_condition_is_available(self, toy_net):
        # 0 has no motorway edge, so both of its edges stay open
        result = preference_search(toy_net, PreferenceVector(CostKind.TT, MOTORWAY), 0, [6, 4])
        assert result.reached(6)
        # 2 has a motorway edge, so 2→4 is pruned
        assert not result.reached(4)

    def test_unreachable_under_pruning(self, toy_net):
        with pytest.raises(NoPathError):
            preference_dijkstra(toy_net, PreferenceVector(CostKind.TT, MOTORWAY), 0, 4)


@pytest.fixture
def random_grid(network_factory):
    """Two-way 10x10 grid with seeded lengths and a mix of four road types."""
    rng = np.random.default_rng(2024)
    side = 10
    types = [RoadType.RESIDENTIAL, RoadType.PRIMARY, RoadType.TRUNK, RoadType.MOTORWAY]
    coords = [(116.3 + 0.002 * (v % side), 39.9 + 0.002 * (v // side)) for v in range(side * side)]
    edges = []
    for v in range(side * side):
        r, c = divmod(v, side)
        for w in ((v + 1) if c + 1 < side else None, (v + side) if r + 1 < side else None):
            if w is not None:
                edges.append((v, w, float(rng.uniform(80, 400)), types[int(rng.integers(len(types)))]))
    return network_factory(coords, edges, bidirectional=True)


class TestSlaveWithoutEffect:
    """A slave that never prunes leaves the plain lowest-cost search unchanged."""

    @pytest.mark.parametrize("slave", [
        None,
        RoadCondition.of(*RoadType),
        # tertiary roads do not occur on the grid
        RoadCondition.of(RoadType.TERTIARY),
    ], ids=["null", "everywhere", "nowhere"])
    def test_random_pairs_match_lowest_cost(self, random_grid, slave):
        net = random_grid
        rng = np.random.default_rng(7)
        masters = list(CostKind)
        checked = 0
        while checked < 1000:
            s, d = (int(x) for x in rng.integers(net.num_vertices, size=2))
            if s == d:
                continue
            master = masters[checked % len(masters)]
            constrained = preference_dijkstra(net, PreferenceVector(master, slave), s, d)
            plain = lowest_cost_path(net, s, d, master)
            assert constrained.source == s and constrained.target == d
            assert path_cost(net, constrained, master) == pytest.approx(path_cost(net, plain, master))
            checked += 1


def _model_with_centers(net, centers):
    regions = [
        Region(0, (0, 1, 2), None, (116.301, 39.9)),
        Region(1, (3, 4, 5), None, (116.304, 39.9)),
        Region(2, (6, 7, 8), None, (116.307, 39.9)),
    ]
    model = RegionGraphModel(regions)
    for region_id, counts in centers.items():
        for vertex, count in counts.items():
            model.record_center(region_id, vertex, count)
    return model


class TestCappedCenters:

    def test_drops_least_popular_from_longer_list(self, line_net):
        model = _model_with_centers(line_net, {0: {0: 5, 1: 1, 2: 3}, 1: {3: 2, 4: 2}})
        assert capped_centers(line_net, model, 0, 1, cap=4) == ([0, 2], [3, 4], True)

    def test_ties_drop_higher_vertex(self, line_net):
        model = _model_with_centers(line_net, {0: {0: 1, 1: 1}, 1: {3: 1}})
        assert capped_centers(line_net, model, 0, 1, cap=1) == ([0], [3], True)

    def test_under_cap_is_untouched(self, line_net):
        model = _model_with_centers(line_net, {0: {2: 1}, 1: {3: 1, 5: 1}})
        assert capped_centers(line_net, model, 0, 1) == ([2], [3, 5], False)

    def test_surrogate_center_nearest_centroid(self, line_net):
        model = _model_with_centers(line_net, {0: {2: 1}})
        sources, targets, _ = capped_centers(line_net, model, 0, 1)
        assert targets == [4]


class TestPopulateBEdges:

    def test_null_preference_uses_fastest_paths(self, line_net, three_region_model):
        edge = three_region_model.add_edge(1, 0, B_EDGE)
        populate_b_edge_paths(line_net, three_region_model)

        assert [r.path.vertices for r in edge.paths] == [(3, 2), (5, 4, 3, 2)]
        assert all(r.synthetic and r.count == 0 for r in edge.paths)
        assert not edge.dead
        assert pipeline_stats.stats['populated_paths'] == 2

    def test_transferred_preference_is_applied(self, line_net, three_region_model):
        edge = three_region_model.add_edge(0, 2, B_EDGE)
        edge.preference = PreferenceVector(CostKind.TT, MOTORWAY)
        populate_b_edge_paths(line_net, three_region_model)
        assert [r.path.vertices for r in edge.paths] == [(2, 3, 5, 6)]

    def test_unreachable_edge_is_dead(self, toy_net):
        regions = [Region(0, (5,), None, (0.0, 0.0)), Region(1, (0,), None, (0.0, 0.0))]
        model = RegionGraphModel(regions)
        edge = model.add_edge(0, 1, B_EDGE)
        populate_b_edge_paths(toy_net, model)
        assert edge.dead
        assert edge.paths == []
        assert pipeline_stats.stats['dead_b_edges'] == 1

    def test_parallel_matches_sequential(self, line_net, three_region_model):
        three_region_model.add_edge(1, 0, B_EDGE)
        three_region_model.add_edge(2, 1, B_EDGE)
        populate_b_edge_paths(line_net, three_region_model, runner=ParallelRunner(max_workers=3))
        parallel = [[r.path for r in e.paths] for e in three_region_model.b_edges()]

        for edge in three_region_model.b_edges():
            edge.paths = []
        populate_b_edge_paths(line_net, three_region_model)
        sequential = [[r.path for r in e.paths] for e in three_region_model.b_edges()]
        assert parallel == sequential
