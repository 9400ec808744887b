# -*- coding: utf-8 -*-
"""Tests for region-graph routing and the query cases."""

import pytest

from trajroute.clustering import Region
from trajroute.monitoring import pipeline_stats
from trajroute.netmodel import NoPathError, Path, RoadType, validate_path
from trajroute.region_graph import T_EDGE, RegionGraphModel
from trajroute.router import (
    IN_OUT_REGION,
    IN_REGION,
    OUT_REGION,
    SAME_REGION,
    NoRouteError,
    StitchError,
    best_edge_path,
    expand_region_path,
    route,
    route_region_graph,
)

LINE = tuple(range(9))


def _placeholder_model(centroids, edges):
    """Regions at the given centroids, live edges carrying single-vertex placeholder paths."""
    regions = [Region(i, (i,), None, c) for i, c in enumerate(centroids)]
    model = RegionGraphModel(regions)
    for a, b in edges:
        model.add_edge(a, b, T_EDGE).add_path(Path.single(a))
    return model


class TestRegionSearch:

    def test_direct_edge(self, three_region_model):
        sequence = route_region_graph(three_region_model, 0, 1)
        assert [(e.from_region, e.to_region) for e in sequence] == [(0, 1)]

    def test_chain(self, three_region_model):
        sequence = route_region_graph(three_region_model, 0, 2)
        assert [(e.from_region, e.to_region) for e in sequence] == [(0, 1), (1, 2)]

    def test_dead_end_closer_region_is_abandoned(self):
        # R1 lies closer to R3 but leads nowhere; the search continues through R2
        model = _placeholder_model(
            [(0.0, 0.0), (0.02, 0.0), (0.0, 0.01), (0.03, 0.0)],
            [(0, 1), (0, 2), (2, 3)],
        )
        sequence = route_region_graph(model, 0, 3)
        assert [(e.from_region, e.to_region) for e in sequence] == [(0, 2), (2, 3)]

    def test_dead_and_pathless_edges_are_skipped(self):
        model = _placeholder_model([(0.0, 0.0), (0.01, 0.0), (0.02, 0.0)], [(0, 1), (1, 2)])
        model.edge_between(1, 2).dead = True
        with pytest.raises(NoRouteError):
            route_region_graph(model, 0, 2)
        model.edge_between(1, 2).dead = False
        model.edge_between(0, 1).paths = []
        with pytest.raises(NoRouteError):
            route_region_graph(model, 0, 2)

    def test_same_region_rejected(self, three_region_model):
        with pytest.raises(ValueError):
            route_region_graph(three_region_model, 1, 1)


class TestExpansion:

    def test_best_edge_path_ranking(self, line_net):
        model = _placeholder_model([(0.0, 0.0), (0.01, 0.0)], [])
        edge = model.add_edge(0, 1, T_EDGE)
        edge.add_path(validate_path(line_net, [3, 5]), count=1)
        edge.add_path(validate_path(line_net, [3, 4, 5]), count=3)
        assert best_edge_path(line_net, edge).vertices == (3, 4, 5)
        edge.add_path(validate_path(line_net, [3, 5]), count=2)
        # equal counts: the motorway shortcut is faster
        assert best_edge_path(line_net, edge).vertices == (3, 5)

    def test_inner_paths_preferred_over_fastest(self, line_net, three_region_model):
        sequence = route_region_graph(three_region_model, 0, 2)
        path = expand_region_path(three_region_model, line_net, sequence, 0, 8)
        assert path.vertices == LINE

    def test_unjoinable_gap_names_region(self, toy_net):
        regions = [Region(0, (5,), None, (0.0, 0.0)), Region(1, (2,), None, (0.0, 0.0))]
        model = RegionGraphModel(regions)
        edge = model.add_edge(0, 1, T_EDGE)
        edge.add_path(validate_path(toy_net, [0, 2]))
        with pytest.raises(StitchError) as excinfo:
            expand_region_path(model, toy_net, [edge], 5, 2)
        assert excinfo.value.region_id == 0

    def test_empty_region_path(self, line_net, three_region_model):
        with pytest.raises(ValueError):
            expand_region_path(three_region_model, line_net, [], 0, 8)


class TestRoute:

    def test_same_region_uses_inner_path(self, line_net, three_region_model):
        result = route(three_region_model, line_net, 3, 5)
        assert result.tag == SAME_REGION
        assert result.path.vertices == (3, 4, 5)

    def test_same_region_without_inner_path_is_fastest(self, line_net, three_region_model):
        result = route(three_region_model, line_net, 0, 2)
        assert result.tag == SAME_REGION
        assert result.path.vertices == (0, 1, 2)

    def test_in_region(self, line_net, three_region_model):
        result = route(three_region_model, line_net, 0, 8)
        assert result.tag == IN_REGION
        assert not result.fallback
        assert result.path.vertices == LINE
        assert len(result.region_path) == 2
        assert pipeline_stats.stats['routes'] == 1

    def test_in_region_without_region_route_falls_back(self, line_net, three_region_model):
        result = route(three_region_model, line_net, 8, 0)
        assert result.tag == IN_REGION
        assert result.fallback
        assert result.path.vertices == tuple(reversed(LINE))
        assert pipeline_stats.stats['region_search_fallbacks'] == 1

    def test_source_outside_regions(self, line_net, three_region_model):
        result = route(three_region_model, line_net, 9, 8)
        assert result.tag == IN_OUT_REGION
        assert not result.fallback
        assert result.path.vertices == (9,) + LINE

    def test_entry_and_exit_in_one_region_fall_back(self, line_net, three_region_model):
        result = route(three_region_model, line_net, 9, 1)
        assert result.tag == IN_OUT_REGION
        assert result.fallback
        assert result.path.vertices == (9, 0, 1)

    def test_destination_outside_regions_without_region_route(self, line_net, three_region_model):
        result = route(three_region_model, line_net, 8, 9)
        assert result.tag == IN_OUT_REGION
        assert result.fallback
        assert result.path.vertices == tuple(reversed(LINE)) + (9,)

    def test_both_endpoints_outside_regions(self, network_factory):
        coords = [(116.300 + 0.001 * i, 39.9) for i in range(11)]
        net = network_factory(coords, [(i, i + 1, 100, RoadType.RESIDENTIAL) for i in range(10)],
                              bidirectional=True)
        regions = [Region(0, (2, 3, 4), RoadType.RESIDENTIAL, (116.303, 39.9)),
                   Region(1, (6, 7, 8), RoadType.RESIDENTIAL, (116.307, 39.9))]
        model = RegionGraphModel(regions)
        model.add_edge(0, 1, T_EDGE).add_path(validate_path(net, [4, 5, 6]), count=2)

        result = route(model, net, 0, 10)
        assert result.tag == OUT_REGION
        assert not result.fallback
        assert result.path.vertices == tuple(range(11))

        # the forward search from 10 settles the goal 9 before any region vertex
        fallback = route(model, net, 10, 9)
        assert fallback.tag == OUT_REGION and fallback.fallback
        assert fallback.path.vertices == (10, 9)

    def test_unreachable_destination(self, toy_net):
        with pytest.raises(NoPathError):
            route(RegionGraphModel([]), toy_net, 0, 1)

    def test_unknown_vertex(self, line_net, three_region_model):
        with pytest.raises(KeyError):
            route(three_region_model, line_net, 0, 99)

    def test_json_uses_original_ids_and_costs(self, line_net, three_region_model):
        payload = route(three_region_model, line_net, 3, 5).to_json(line_net)
        assert payload["path"] == [3, 4, 5]
        assert payload["tag"] == "SameRegion"
        assert payload["costs"]["DI"] == pytest.approx(200.0)
        assert payload["costs"]["TT"] == pytest.approx(24.0)
        assert set(payload["costs"]) == {"DI", "TT", "FC"}
