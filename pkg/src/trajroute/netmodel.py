# -*- coding: utf-8 -*-
"""
Road network, path and trajectory model.

The road network is a directed graph with dense integer ids. Every edge
carries a length, a speed limit and a road type, from which the three cost
weights (distance, travel time, fuel consumption) are derived. Original ids
from input files are kept in side mappings for output.
"""

from dataclasses import dataclass
from enum import Enum, IntEnum


class PathValidationError(ValueError):
    """Raised when a vertex sequence is not a path in the road network."""


class NoPathError(LookupError):
    """Raised when a destination cannot be reached from a source."""

    def __init__(self, source, target, detail=""):
        self.source = source
        self.target = target
        message = f"no path from {source} to {target}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class RoadType(IntEnum):
    """Six road levels, ordered from fastest class to slowest."""
    MOTORWAY = 1
    TRUNK = 2
    PRIMARY = 3
    SECONDARY = 4
    TERTIARY = 5
    RESIDENTIAL = 6

    @classmethod
    def from_name(cls, name):
        """
        Parse a road type name (case-insensitive) or ordinal code.

        Raises:
            ValueError: If the name is not one of the six road types
        """
        text = str(name).strip()
        if text.isdigit():
            return cls(int(text))
        try:
            return cls[text.upper()]
        except KeyError:
            raise ValueError(f"unknown road type '{name}'") from None

    @property
    def label(self):
        return self.name.lower()


class CostKind(str, Enum):
    """Travel cost features (the master dimension of a preference)."""
    DI = "DI"
    TT = "TT"
    FC = "FC"


@dataclass(frozen=True)
class FuelModel:
    """
    Per-edge fuel consumption model.

    FC(e) = length_km * (a + b / v + c * v^2), v in km/h, result in liters.
    Convex in speed, so fuel-optimal routes differ from both distance- and
    time-optimal ones.
    """
    a: float = 0.17
    b: float = 2.1
    c: float = 0.000012

    def consumption(self, length_m, speed_kmh):
        v = float(speed_kmh)
        return (length_m / 1000.0) * (self.a + self.b / v + self.c * v * v)


@dataclass(frozen=True)
class Vertex:
    id: int
    lon: float
    lat: float


@dataclass(frozen=True)
class Edge:
    id: int
    source: int
    target: int
    length: float
    speed_limit: float
    road_type: RoadType


@dataclass(frozen=True)
class Path:
    """Vertex sequence with the resolved edge ids between consecutive vertices."""
    vertices: tuple
    edges: tuple

    @classmethod
    def single(cls, vertex):
        return cls(vertices=(vertex,), edges=())

    @property
    def source(self):
        return self.vertices[0]

    @property
    def target(self):
        return self.vertices[-1]

    def __len__(self):
        return len(self.vertices)

    def concat(self, other):
        """
        Join two paths sharing the junction vertex (self.target == other.source).

        Raises:
            PathValidationError: If the paths do not meet
        """
        if self.target != other.source:
            raise PathValidationError(
                f"cannot join paths at {self.target} and {other.source}"
            )
        return Path(self.vertices + other.vertices[1:], self.edges + other.edges)


@dataclass(frozen=True)
class Trajectory:
    traj_id: int
    driver_id: int
    departure: int
    path: Path


class RoadNetwork:
    """
    Immutable directed road network.

    Vertex ids are 0..n-1 and edge ids 0..m-1 in input order. Adjacency
    indexes and the DI/TT/FC weight tables are built once at construction,
    so a network can be shared freely between worker threads.
    """

    def __init__(self, vertices, edges, fuel_model=None,
                 vertex_origin=None, edge_origin=None):
        """
        Build and validate a road network.

        Args:
            vertices (sequence[Vertex]): Vertices with ids 0..n-1 in order
            edges (sequence[Edge]): Edges with ids 0..m-1 in order
            fuel_model (FuelModel): Fuel formula constants (default: FuelModel())
            vertex_origin (sequence): Original vertex id per dense id
            edge_origin (sequence): Original edge id per dense id

        Raises:
            ValueError: If ids are not dense, an endpoint is unknown, or a
                        length or speed limit is not strictly positive
        """
        self.vertices = tuple(vertices)
        self.edges = tuple(edges)
        self.fuel_model = fuel_model or FuelModel()
        self.vertex_origin = tuple(vertex_origin) if vertex_origin is not None else tuple(range(len(self.vertices)))
        self.edge_origin = tuple(edge_origin) if edge_origin is not None else tuple(range(len(self.edges)))
        self._validate()

        n = len(self.vertices)
        out_adj = [[] for _ in range(n)]
        in_adj = [[] for _ in range(n)]
        self._pair_index = {}
        for edge in self.edges:
            out_adj[edge.source].append(edge.id)
            in_adj[edge.target].append(edge.id)
            key = (edge.source, edge.target)
            if key not in self._pair_index:
                self._pair_index[key] = edge.id
        self._out = tuple(tuple(a) for a in out_adj)
        self._in = tuple(tuple(a) for a in in_adj)
        self._origin_index = {orig: i for i, orig in enumerate(self.vertex_origin)}

        self._weights = {
            CostKind.DI: tuple(float(e.length) for e in self.edges),
            CostKind.TT: tuple(e.length / (e.speed_limit / 3.6) for e in self.edges),
            CostKind.FC: tuple(self.fuel_model.consumption(e.length, e.speed_limit) for e in self.edges),
        }

    def _validate(self):
        if len(self.vertex_origin) != len(self.vertices):
            raise ValueError("vertex_origin must have one entry per vertex")
        if len(self.edge_origin) != len(self.edges):
            raise ValueError("edge_origin must have one entry per edge")
        for i, vertex in enumerate(self.vertices):
            if vertex.id != i:
                raise ValueError(f"vertex ids must be dense: expected {i}, got {vertex.id}")
        n = len(self.vertices)
        for i, edge in enumerate(self.edges):
            if edge.id != i:
                raise ValueError(f"edge ids must be dense: expected {i}, got {edge.id}")
            if not (0 <= edge.source < n):
                raise ValueError(f"edge {i}: unknown vertex {edge.source}")
            if not (0 <= edge.target < n):
                raise ValueError(f"edge {i}: unknown vertex {edge.target}")
            if edge.length <= 0:
                raise ValueError(f"edge {i}: length must be positive, got {edge.length}")
            if edge.speed_limit <= 0:
                raise ValueError(f"edge {i}: speed limit must be positive, got {edge.speed_limit}")

    @property
    def num_vertices(self):
        return len(self.vertices)

    @property
    def num_edges(self):
        return len(self.edges)

    def vertex(self, vertex_id):
        """
        Look up a vertex.

        Raises:
            KeyError: If the id is unknown
        """
        if not isinstance(vertex_id, int) or not (0 <= vertex_id < len(self.vertices)):
            raise KeyError(f"unknown vertex {vertex_id}")
        return self.vertices[vertex_id]

    def edge(self, edge_id):
        """
        Look up an edge.

        Raises:
            KeyError: If the id is unknown
        """
        if not isinstance(edge_id, int) or not (0 <= edge_id < len(self.edges)):
            raise KeyError(f"unknown edge {edge_id}")
        return self.edges[edge_id]

    def has_vertex(self, vertex_id):
        return isinstance(vertex_id, int) and 0 <= vertex_id < len(self.vertices)

    def out_edges(self, vertex_id):
        return self._out[vertex_id]

    def in_edges(self, vertex_id):
        return self._in[vertex_id]

    def edge_between(self, u, v):
        """Lowest edge id from u to v, or None."""
        return self._pair_index.get((u, v))

    def weights(self, kind):
        """Per-edge weight table for a cost kind, indexed by edge id."""
        return self._weights[CostKind(kind)]

    def original_vertex_id(self, vertex_id):
        return self.vertex_origin[vertex_id]

    def dense_vertex_id(self, original_id):
        """
        Map an original (input file) vertex id to the dense id.

        Raises:
            KeyError: If the original id is unknown
        """
        try:
            return self._origin_index[original_id]
        except KeyError:
            raise KeyError(f"unknown vertex {original_id}") from None


def edge_weight(net, edge_id, kind):
    """
    Weight of one edge under a cost kind.

    DI is the length in meters, TT the travel time in seconds at the speed
    limit, FC the fuel model value in liters.

    Raises:
        KeyError: If the edge id is unknown
    """
    net.edge(edge_id)
    return net.weights(kind)[edge_id]


def _check_path(net, path):
    if not path.vertices:
        raise PathValidationError("empty path")
    if len(path.edges) != len(path.vertices) - 1:
        raise PathValidationError("edge count does not match vertex count")
    for i, eid in enumerate(path.edges):
        u, v = path.vertices[i], path.vertices[i + 1]
        try:
            edge = net.edge(eid)
        except KeyError:
            raise PathValidationError(f"no edge {u}→{v}") from None
        if edge.source != u or edge.target != v:
            raise PathValidationError(f"no edge {u}→{v}")


def path_cost(net, path, kind):
    """
    Sum of edge weights along a path (0 for a single-vertex path).

    Raises:
        PathValidationError: If the path is not valid on the network
    """
    _check_path(net, path)
    table = net.weights(kind)
    return float(sum(table[e] for e in path.edges))


def validate_path(net, vertex_ids):
    """
    Resolve a vertex sequence into a Path.

    Consecutive vertices are joined by the lowest-id edge between them.

    Args:
        net (RoadNetwork): Road network
        vertex_ids (iterable[int]): Dense vertex ids

    Returns:
        Path: Path with resolved edge ids

    Raises:
        PathValidationError: On an empty sequence, an unknown vertex, or
                             the first consecutive pair with no edge
    """
    vertices = tuple(vertex_ids)
    if not vertices:
        raise PathValidationError("empty path")
    for v in vertices:
        if not net.has_vertex(v):
            raise PathValidationError(f"unknown vertex {v}")
    edges = []
    for u, v in zip(vertices, vertices[1:]):
        eid = net.edge_between(u, v)
        if eid is None:
            raise PathValidationError(f"no edge {u}→{v}")
        edges.append(eid)
    return Path(vertices=vertices, edges=tuple(edges))
