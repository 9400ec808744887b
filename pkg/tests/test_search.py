# -*- coding: utf-8 -*-
"""Tests for the label-settling search engine."""

import itertools

import pytest

from trajroute.netmodel import CostKind, NoPathError, Path, RoadType, path_cost
from trajroute.search import fastest_path, label_setting, lowest_cost_path, shortest_path


def _grid(network_factory):
    """3x3 two-way grid with mixed road types and lengths."""
    coords = [(c * 0.001, r * 0.001) for r in range(3) for c in range(3)]
    types = [RoadType.MOTORWAY, RoadType.PRIMARY, RoadType.RESIDENTIAL, RoadType.TERTIARY]
    edges = []
    k = 0
    for r in range(3):
        for c in range(3):
            v = r * 3 + c
            if c < 2:
                edges.append((v, v + 1, 100 + 37 * k, types[k % 4]))
                k += 1
            if r < 2:
                edges.append((v, v + 3, 120 + 23 * k, types[k % 4]))
                k += 1
    return network_factory(coords, edges, bidirectional=True)


def _simple_paths(net, s, d):
    """Every simple path s→d, by brute force."""
    found = []

    def walk(v, vertices, edges):
        if v == d:
            found.append(Path(tuple(vertices), tuple(edges)))
            return
        for eid in net.out_edges(v):
            w = net.edges[eid].target
            if w not in vertices:
                walk(w, vertices + [w], edges + [eid])

    walk(s, [s], [])
    return found


class TestPlainSearch:

    def test_toy_optima(self, toy_net):
        assert shortest_path(toy_net, 0, 5).vertices == (0, 6, 5)
        assert fastest_path(toy_net, 0, 5).vertices == (0, 2, 4, 5)
        assert lowest_cost_path(toy_net, 0, 5, CostKind.FC).vertices == (0, 6, 5)

    def test_same_vertex(self, toy_net):
        assert fastest_path(toy_net, 3, 3) == Path.single(3)

    def test_unreachable(self, toy_net):
        with pytest.raises(NoPathError):
            fastest_path(toy_net, 0, 1)
        with pytest.raises(NoPathError):
            fastest_path(toy_net, 5, 0)

    def test_unknown_vertex(self, toy_net):
        with pytest.raises(KeyError):
            fastest_path(toy_net, 0, 77)

    @pytest.mark.parametrize("kind", [CostKind.DI, CostKind.TT, CostKind.FC])
    def test_matches_brute_force_on_grid(self, network_factory, kind):
        net = _grid(network_factory)
        for s, d in itertools.permutations(range(9), 2):
            best = min(path_cost(net, p, kind) for p in _simple_paths(net, s, d))
            found = lowest_cost_path(net, s, d, kind)
            assert path_cost(net, found, kind) == pytest.approx(best)


class TestEngineOptions:

    def test_reverse_search_returns_travel_direction(self, toy_net):
        result = label_setting(toy_net, 5, CostKind.TT, reverse=True)
        path = result.path_to(toy_net, 0)
        assert path.source == 0 and path.target == 5
        assert path.vertices == (0, 2, 4, 5)

    def test_stop_callback(self, toy_net):
        result = label_setting(toy_net, 0, CostKind.DI, stop=lambda v: v == 2)
        assert result.settled[-1] == 2
        assert not result.reached(5)

    def test_edge_selection_restricts_search(self, toy_net):
        residential = {e.id for e in toy_net.edges if e.road_type == RoadType.RESIDENTIAL}

        def select(_, edge_ids):
            return [e for e in edge_ids if e in residential]

        path = lowest_cost_path(toy_net, 0, 5, CostKind.TT, select_edges=select)
        assert path.vertices == (0, 6, 5)

    def test_ties_settle_lower_vertex_first(self, network_factory):
        coords = [(0.0, 0.0)] * 4
        net = network_factory(coords, [
            (0, 2, 100, RoadType.RESIDENTIAL),
            (0, 1, 100, RoadType.RESIDENTIAL),
            (1, 3, 100, RoadType.RESIDENTIAL),
            (2, 3, 100, RoadType.RESIDENTIAL),
        ])
        result = label_setting(net, 0, CostKind.DI)
        assert result.settled == [0, 1, 2, 3]
        assert result.path_to(net, 3).vertices == (0, 1, 3)
