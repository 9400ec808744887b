# -*- coding: utf-8 -*-
"""Shared fixtures: small hand-checkable networks and region graph models."""

import pytest

from trajroute.clustering import Region
from trajroute.monitoring import pipeline_stats, solver_monitor
from trajroute.netmodel import Edge, RoadNetwork, RoadType, Vertex, validate_path
from trajroute.region_graph import T_EDGE, RegionGraphModel

SPEEDS = {
    RoadType.MOTORWAY: 110.0,
    RoadType.TRUNK: 90.0,
    RoadType.PRIMARY: 70.0,
    RoadType.SECONDARY: 60.0,
    RoadType.TERTIARY: 50.0,
    RoadType.RESIDENTIAL: 30.0,
}


def make_network(coords, edges, bidirectional=False):
    """
    Network from [(lon, lat)] and [(u, v, length_m, road_type)].

    With bidirectional=True every edge is added in both directions.
    """
    vertices = [Vertex(i, lon, lat) for i, (lon, lat) in enumerate(coords)]
    built = []
    for u, v, length, road_type in edges:
        pairs = [(u, v), (v, u)] if bidirectional else [(u, v)]
        for a, b in pairs:
            built.append(Edge(len(built), a, b, float(length), SPEEDS[road_type], road_type))
    return RoadNetwork(vertices, built)


@pytest.fixture(autouse=True)
def reset_statistics():
    """Global counters start from zero in every test."""
    pipeline_stats.reset()
    solver_monitor.reset()
    yield


@pytest.fixture
def network_factory():
    return make_network


@pytest.fixture
def toy_net():
    """
    Seven vertices, three routes from 0 to 5.

    0→2→3→5  motorway in the middle, 2600 m, TT 137.45 s
    0→2→4→5  primary in the middle, 1600 m, TT 109.71 s (fastest)
    0→6→5    residential, 1400 m (shortest and most frugal)
    Vertex 1 is isolated.
    """
    coords = [(116.300 + 0.001 * i, 39.900) for i in range(7)]
    edges = [
        (0, 2, 300, RoadType.RESIDENTIAL),
        (2, 3, 2000, RoadType.MOTORWAY),
        (3, 5, 300, RoadType.RESIDENTIAL),
        (2, 4, 1200, RoadType.PRIMARY),
        (4, 5, 100, RoadType.RESIDENTIAL),
        (0, 6, 700, RoadType.RESIDENTIAL),
        (6, 5, 700, RoadType.RESIDENTIAL),
    ]
    return make_network(coords, edges)


@pytest.fixture
def line_net():
    """
    Two-way line 0-1-...-8 of 100 m residential edges, plus a one-way
    motorway shortcut 3→5 (150 m) and an outlying vertex 9 joined to 0.
    """
    coords = [(116.300 + 0.001 * i, 39.900) for i in range(9)] + [(116.299, 39.900)]
    edges = [(i, i + 1, 100, RoadType.RESIDENTIAL) for i in range(8)]
    edges.append((0, 9, 100, RoadType.RESIDENTIAL))
    net = make_network(coords, edges, bidirectional=True)
    vertices = list(net.vertices)
    built = list(net.edges)
    built.append(Edge(len(built), 3, 5, 150.0, SPEEDS[RoadType.MOTORWAY], RoadType.MOTORWAY))
    return RoadNetwork(vertices, built)


def _region(net, region_id, members, road_type=RoadType.RESIDENTIAL):
    lons = [net.vertices[v].lon for v in members]
    lats = [net.vertices[v].lat for v in members]
    return Region(region_id, tuple(members), road_type, (sum(lons) / len(lons), sum(lats) / len(lats)))


@pytest.fixture
def three_region_model(line_net):
    """
    Regions R0={0,1,2}, R1={3,4,5}, R2={6,7,8} on line_net.

    T-edges R0→R1 (path 2,3) and R1→R2 (path 5,6); the inner path 3,4,5 of
    R1 is recorded twice.
    """
    net = line_net
    regions = [_region(net, 0, (0, 1, 2)), _region(net, 1, (3, 4, 5)), _region(net, 2, (6, 7, 8))]
    model = RegionGraphModel(regions)
    model.add_edge(0, 1, T_EDGE).add_path(validate_path(net, [2, 3]), count=3)
    model.add_edge(1, 2, T_EDGE).add_path(validate_path(net, [5, 6]), count=3)
    model.add_inner_path(1, validate_path(net, [3, 4, 5]), count=2)
    for region_id, vertex in ((0, 2), (1, 3), (1, 5), (2, 6)):
        model.record_center(region_id, vertex, count=3)
    return model


@pytest.fixture
def block_regions():
    """Factory: the blocks of a synthetic world as regions, in block order."""
    def build(cfg, net):
        blocks = sorted({cfg.block_of(v) for v in range(net.num_vertices)})
        return [_region(net, i, cfg.block_vertices(block), road_type=None) for i, block in enumerate(blocks)]
    return build
