# -*- coding: utf-8 -*-
"""
Loading, saving and generating road networks and trajectories.

File formats:
    nodes.csv           node_id,lon,lat
    edges.csv           edge_id,from,to,length_m,speed_kmh,road_type,oneway
    trajectories.jsonl  {"traj_id":..,"driver_id":..,"departure":..,"path":[node_id,...]}

Trajectories are already map-matched vertex sequences. The synthetic
generator builds a grid city and drives planted preferences over it with
the preference-constrained search, so learned preferences can be checked
against ground truth.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .apply_pref import preference_dijkstra
from .monitoring import pipeline_stats
from .netmodel import (
    CostKind, Edge, FuelModel, NoPathError, PathValidationError, RoadNetwork,
    RoadType, Trajectory, Vertex, validate_path,
)
from .preference import PreferenceVector
from .utils import EARTH_RADIUS_M, is_debug_enabled

NODE_COLUMNS = ("node_id", "lon", "lat")
EDGE_COLUMNS = ("edge_id", "from", "to", "length_m", "speed_kmh", "road_type", "oneway")

_TRUE_VALUES = {"true", "1", "yes"}
_FALSE_VALUES = {"false", "0", "no"}

SECONDS_PER_DAY = 86400


class DataFormatError(ValueError):
    """Malformed input row; carries the file name and 1-based line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if line is not None:
            where = f" at line {line}"
        if path is not None:
            where = f"{where} of {path}"
        super().__init__(f"{message}{where}")


class SyntheticGenerationError(RuntimeError):
    """Raised when OD sampling keeps hitting unreachable pairs."""


@dataclass(frozen=True)
class TimeWindow:
    """Time-of-day window [start, end) in seconds after midnight UTC; may wrap midnight."""
    start_s: int
    end_s: int

    @classmethod
    def parse(cls, text):
        """
        Parse "HH:MM-HH:MM".

        Raises:
            ValueError: On a malformed window or an empty one (start == end)
        """
        try:
            start_text, end_text = text.strip().split("-")
            start = _parse_clock(start_text)
            end = _parse_clock(end_text)
        except ValueError:
            raise ValueError(f"invalid time window '{text}', expected HH:MM-HH:MM") from None
        if start == end:
            raise ValueError(f"time window '{text}' is empty")
        return cls(start, end)

    def contains(self, epoch_s):
        tod = int(epoch_s) % SECONDS_PER_DAY
        if self.start_s < self.end_s:
            return self.start_s <= tod < self.end_s
        return tod >= self.start_s or tod < self.end_s

    def __str__(self):
        return f"{self.start_s // 3600:02d}:{self.start_s % 3600 // 60:02d}-" \
               f"{self.end_s // 3600:02d}:{self.end_s % 3600 // 60:02d}"


def _parse_clock(text):
    hours, minutes = text.strip().split(":")
    h, m = int(hours), int(minutes)
    if not (0 <= h <= 24 and 0 <= m < 60) or (h == 24 and m != 0):
        raise ValueError(text)
    return h * 3600 + m * 60


@dataclass(frozen=True)
class RejectedRecord:
    line: int
    traj_id: object
    reason: str


@dataclass
class RejectsReport:
    """Outcome of a trajectory load: every input record is accepted or rejected."""
    total: int = 0
    rejected: list = field(default_factory=list)

    @property
    def accepted(self):
        return self.total - len(self.rejected)

    def to_dict(self):
        return {
            "total": self.total,
            "accepted": self.accepted,
            "rejected": [
                {"line": r.line, "traj_id": r.traj_id, "reason": r.reason}
                for r in self.rejected
            ],
        }


def _read_csv(path, columns):
    """Yield (line_number, row dict) with stripped values, checking the header."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        header = [h.strip() for h in (reader.fieldnames or [])]
        missing = [c for c in columns if c not in header]
        if missing:
            raise DataFormatError(f"missing column(s) {', '.join(missing)}", path, 1)
        reader.fieldnames = header
        for row in reader:
            if not any((v or "").strip() for v in row.values() if isinstance(v, str)):
                continue
            yield reader.line_num, {k: (v or "").strip() for k, v in row.items() if k is not None}


def load_road_network(nodes_file, edges_file, fuel_model=None):
    """
    Load a road network from nodes.csv and edges.csv.

    Dense ids are assigned in file order; an edge with oneway=false becomes
    two directed edges sharing its original edge id.

    Args:
        nodes_file (str): Path to nodes.csv
        edges_file (str): Path to edges.csv
        fuel_model (FuelModel): Fuel constants (default: FuelModel())

    Returns:
        RoadNetwork: Validated network

    Raises:
        DataFormatError: Malformed row, unknown endpoint, nonpositive
                         length or speed
        FileNotFoundError: If a file does not exist
    """
    vertices = []
    vertex_origin = []
    index = {}
    for line, row in _read_csv(nodes_file, NODE_COLUMNS):
        try:
            original = int(row["node_id"])
            lon = float(row["lon"])
            lat = float(row["lat"])
        except ValueError:
            raise DataFormatError("malformed node row", nodes_file, line) from None
        if original in index:
            raise DataFormatError(f"duplicate vertex {original}", nodes_file, line)
        index[original] = len(vertices)
        vertices.append(Vertex(len(vertices), lon, lat))
        vertex_origin.append(original)

    edges = []
    edge_origin = []
    for line, row in _read_csv(edges_file, EDGE_COLUMNS):
        try:
            original = int(row["edge_id"])
            src = int(row["from"])
            dst = int(row["to"])
            length = float(row["length_m"])
            speed = float(row["speed_kmh"])
        except ValueError:
            raise DataFormatError("malformed edge row", edges_file, line) from None
        for endpoint in (src, dst):
            if endpoint not in index:
                raise DataFormatError(f"unknown vertex {endpoint}", edges_file, line)
        if not length > 0:
            raise DataFormatError(f"length must be positive, got {row['length_m']}", edges_file, line)
        if not speed > 0:
            raise DataFormatError(f"speed must be positive, got {row['speed_kmh']}", edges_file, line)
        try:
            road_type = RoadType.from_name(row["road_type"])
        except ValueError as e:
            raise DataFormatError(str(e), edges_file, line) from None
        oneway = row["oneway"].lower()
        if oneway not in _TRUE_VALUES and oneway not in _FALSE_VALUES:
            raise DataFormatError(f"oneway must be true or false, got '{row['oneway']}'", edges_file, line)

        u, v = index[src], index[dst]
        edges.append(Edge(len(edges), u, v, length, speed, road_type))
        edge_origin.append(original)
        if oneway in _FALSE_VALUES:
            edges.append(Edge(len(edges), v, u, length, speed, road_type))
            edge_origin.append(original)

    return RoadNetwork(vertices, edges, fuel_model=fuel_model,
                       vertex_origin=vertex_origin, edge_origin=edge_origin)


def load_trajectories(traj_file, net, time_window=None):
    """
    Load map-matched trajectories from a JSONL file.

    Records with an invalid path, an unknown vertex, a negative departure,
    bad JSON, or a departure outside the time window are rejected and
    reported, never raised.

    Args:
        traj_file (str): Path to trajectories.jsonl
        net (RoadNetwork): Network the paths refer to (original vertex ids)
        time_window (TimeWindow): Optional departure time-of-day filter

    Returns:
        tuple: (list[Trajectory], RejectsReport)
    """
    trajectories = []
    report = RejectsReport()

    with open(traj_file, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            text = raw.strip()
            if not text:
                continue
            report.total += 1
            traj_id = None
            try:
                record = json.loads(text)
                traj_id = record.get("traj_id")
                traj_id = int(record["traj_id"])
                driver_id = int(record["driver_id"])
                departure = int(record["departure"])
                raw_path = record["path"]
                if not isinstance(raw_path, list):
                    raise TypeError("path must be a list")
            except (ValueError, KeyError, TypeError, AttributeError):
                report.rejected.append(RejectedRecord(line_number, traj_id, "malformed record"))
                continue

            if departure < 0:
                report.rejected.append(RejectedRecord(line_number, traj_id, "negative departure"))
                continue
            if time_window is not None and not time_window.contains(departure):
                report.rejected.append(RejectedRecord(line_number, traj_id, "outside time window"))
                continue

            bad = [v for v in raw_path if not _is_vertex_id(v)]
            if bad:
                reason = f"non-integer vertex id {json.dumps(bad[0])}"
                report.rejected.append(RejectedRecord(line_number, traj_id, reason))
                continue

            try:
                dense = [net.dense_vertex_id(v) for v in raw_path]
                path = validate_path(net, dense)
            except KeyError as e:
                report.rejected.append(RejectedRecord(line_number, traj_id, str(e).strip("'\"")))
                continue
            except (PathValidationError, ValueError, TypeError) as e:
                reason = _original_pair_reason(net, str(e))
                report.rejected.append(RejectedRecord(line_number, traj_id, reason))
                continue

            trajectories.append(Trajectory(traj_id, driver_id, departure, path))

    pipeline_stats.safe.increment('trajectories_loaded', len(trajectories))
    pipeline_stats.safe.increment('trajectories_rejected', len(report.rejected))
    if is_debug_enabled():
        for r in report.rejected:
            print(f"[DEBUG] Rejected trajectory {r.traj_id} (line {r.line}): {r.reason}")
    return trajectories, report


def _is_vertex_id(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _original_pair_reason(net, reason):
    """Rewrite 'no edge a→b' from dense ids to original ids."""
    if not reason.startswith("no edge "):
        return reason
    try:
        a, b = reason[len("no edge "):].split("→")
        return f"no edge {net.original_vertex_id(int(a))}→{net.original_vertex_id(int(b))}"
    except (ValueError, IndexError):
        return reason


def _is_reverse_twin(net, edge, other):
    return (net.edge_origin[edge.id] == net.edge_origin[other.id]
            and (other.source, other.target) == (edge.target, edge.source)
            and other.length == edge.length
            and other.speed_limit == edge.speed_limit
            and other.road_type == edge.road_type)


def save_road_network(net, nodes_file, edges_file):
    """
    Write a network as nodes.csv and edges.csv with original ids.

    An edge immediately followed by its reverse twin (same original id,
    length, speed and road type) is written as one oneway=false row, the
    way the loader expands two-way rows. Every other edge gets a
    oneway=true row, so loading the files again rebuilds the same dense
    model.
    """
    with open(nodes_file, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(NODE_COLUMNS)
        for vertex in net.vertices:
            writer.writerow([net.vertex_origin[vertex.id], repr(vertex.lon), repr(vertex.lat)])

    with open(edges_file, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(EDGE_COLUMNS)
        edges = net.edges
        i = 0
        while i < len(edges):
            edge = edges[i]
            two_way = i + 1 < len(edges) and _is_reverse_twin(net, edge, edges[i + 1])
            writer.writerow([
                net.edge_origin[edge.id],
                net.vertex_origin[edge.source],
                net.vertex_origin[edge.target],
                repr(float(edge.length)),
                repr(float(edge.speed_limit)),
                edge.road_type.label,
                "false" if two_way else "true",
            ])
            i += 2 if two_way else 1


def save_trajectories(trajectories, net, traj_file):
    """Write trajectories as JSONL with original vertex ids."""
    with open(traj_file, "w", encoding="utf-8", newline="\n") as f:
        for traj in trajectories:
            record = {
                "traj_id": traj.traj_id,
                "driver_id": traj.driver_id,
                "departure": traj.departure,
                "path": [net.vertex_origin[v] for v in traj.path.vertices],
            }
            f.write(json.dumps(record) + "\n")


# ----------------------------------------------------------------------------
# Synthetic worlds
# ----------------------------------------------------------------------------

DEFAULT_SPEEDS = {
    RoadType.MOTORWAY: 110.0,
    RoadType.TRUNK: 90.0,
    RoadType.PRIMARY: 70.0,
    RoadType.SECONDARY: 60.0,
    RoadType.TERTIARY: 50.0,
    RoadType.RESIDENTIAL: 30.0,
}


def default_line_plan(count):
    """Road type per grid line: a motorway through the middle, primaries every 4th line."""
    plan = []
    for i in range(count):
        if i == count // 2:
            plan.append(RoadType.MOTORWAY)
        elif i % 4 == 0:
            plan.append(RoadType.PRIMARY)
        else:
            plan.append(RoadType.RESIDENTIAL)
    return tuple(plan)


@dataclass
class SyntheticConfig:
    """
    Parameters of a synthetic grid world.

    Vertex (r, c) has dense id r * grid_cols + c. Blocks are
    block_size × block_size squares of vertices, identified by
    (r // block_size, c // block_size). Trajectories between two blocks
    follow the preference planted for that block pair, or one drawn from
    preference_pool the first time the pair is sampled.
    """
    grid_rows: int = 8
    grid_cols: int = 8
    road_type_plan: dict = field(default_factory=dict)
    trajectory_count: int = 0
    planted_preferences: dict = field(default_factory=dict)
    preference_pool: tuple = (PreferenceVector(CostKind.TT), PreferenceVector(CostKind.DI))
    restrict_to_planted: bool = False
    rng_seed: int = 0
    detour_noise: float = 0.0
    block_size: int = 4
    spacing_m: float = 200.0
    length_jitter: float = 0.1
    oneway_major: bool = False
    origin_lon: float = 116.30
    origin_lat: float = 39.90
    departure_start: int = 1_600_000_000
    departure_span_s: int = 30 * SECONDS_PER_DAY
    driver_count: int = 50
    min_hops: int = 2
    max_retries: int = 200
    speeds: dict = field(default_factory=lambda: dict(DEFAULT_SPEEDS))

    def validate(self):
        """
        Validate configuration values.

        Raises:
            ValueError: If configuration is invalid
        """
        if self.grid_rows < 2 or self.grid_cols < 2:
            raise ValueError("grid_rows and grid_cols must be at least 2")
        if self.trajectory_count < 0:
            raise ValueError("trajectory_count must be non-negative")
        if not 0.0 <= self.detour_noise <= 1.0:
            raise ValueError("detour_noise must be in [0, 1]")
        if not 0.0 <= self.length_jitter < 1.0:
            raise ValueError("length_jitter must be in [0, 1)")
        if self.block_size < 1:
            raise ValueError("block_size must be at least 1")
        if self.spacing_m <= 0:
            raise ValueError("spacing_m must be positive")
        if self.max_retries < 1:
            raise ValueError("max_retries must be at least 1")
        if self.departure_span_s < 1:
            raise ValueError("departure_span_s must be at least 1")
        if self.driver_count < 1:
            raise ValueError("driver_count must be at least 1")
        if not self.preference_pool and not self.planted_preferences:
            raise ValueError("need planted_preferences or a non-empty preference_pool")
        if self.restrict_to_planted and not self.planted_preferences:
            raise ValueError("restrict_to_planted requires planted_preferences")
        for key in ("rows", "cols"):
            plan = self.road_type_plan.get(key)
            expected = self.grid_rows if key == "rows" else self.grid_cols
            if plan is not None and len(plan) != expected:
                raise ValueError(f"road_type_plan['{key}'] needs {expected} entries")

    def block_of(self, vertex_id):
        r, c = divmod(vertex_id, self.grid_cols)
        return (r // self.block_size, c // self.block_size)

    def block_vertices(self, block):
        br, bc = block
        rows = range(br * self.block_size, min((br + 1) * self.block_size, self.grid_rows))
        cols = range(bc * self.block_size, min((bc + 1) * self.block_size, self.grid_cols))
        return [r * self.grid_cols + c for r in rows for c in cols]


@dataclass
class SyntheticWorld:
    """Generated network and trajectories plus the ground truth behind them."""
    network: RoadNetwork
    trajectories: list
    block_preferences: dict
    trajectory_preferences: dict
    detoured: set


def _build_grid(cfg, rng):
    rows, cols = cfg.grid_rows, cfg.grid_cols
    row_types = tuple(cfg.road_type_plan.get("rows") or default_line_plan(rows))
    col_types = tuple(cfg.road_type_plan.get("cols") or default_line_plan(cols))

    lat0 = cfg.origin_lat
    deg_per_m_lat = math.degrees(1.0 / EARTH_RADIUS_M)
    deg_per_m_lon = deg_per_m_lat / math.cos(math.radians(lat0))
    vertices = []
    for r in range(rows):
        for c in range(cols):
            vertices.append(Vertex(
                r * cols + c,
                cfg.origin_lon + c * cfg.spacing_m * deg_per_m_lon,
                lat0 + r * cfg.spacing_m * deg_per_m_lat,
            ))

    edges = []
    edge_origin = []
    segment_count = [0]

    def add_line_edge(u, v, road_type, line_index, line_count):
        length = cfg.spacing_m * (1.0 + cfg.length_jitter * float(rng.random()))
        speed = cfg.speeds[road_type]
        original = segment_count[0]
        segment_count[0] += 1
        major = road_type in (RoadType.MOTORWAY, RoadType.TRUNK)
        interior = 0 < line_index < line_count - 1
        if cfg.oneway_major and major and interior:
            a, b = (u, v) if line_index % 2 == 0 else (v, u)
            edges.append(Edge(len(edges), a, b, length, speed, road_type))
            edge_origin.append(original)
        else:
            edges.append(Edge(len(edges), u, v, length, speed, road_type))
            edge_origin.append(original)
            edges.append(Edge(len(edges), v, u, length, speed, road_type))
            edge_origin.append(original)

    for r in range(rows):
        for c in range(cols - 1):
            add_line_edge(r * cols + c, r * cols + c + 1, RoadType(row_types[r]), r, rows)
    for c in range(cols):
        for r in range(rows - 1):
            add_line_edge(r * cols + c, (r + 1) * cols + c, RoadType(col_types[c]), c, cols)

    return RoadNetwork(vertices, edges,
                       vertex_origin=range(len(vertices)), edge_origin=edge_origin)


def _sample_od(cfg, rng, n):
    if cfg.restrict_to_planted:
        pairs = sorted(cfg.planted_preferences)
        ob, db = pairs[int(rng.integers(len(pairs)))]
        sources = cfg.block_vertices(ob)
        targets = cfg.block_vertices(db)
        return sources[int(rng.integers(len(sources)))], targets[int(rng.integers(len(targets)))]
    return int(rng.integers(n)), int(rng.integers(n))


def _hops(cfg, s, d):
    rs, cs = divmod(s, cfg.grid_cols)
    rd, cd = divmod(d, cfg.grid_cols)
    return abs(rs - rd) + abs(cs - cd)


def generate_synthetic(cfg):
    """
    Generate a grid network and preference-driven trajectories.

    Each trajectory samples an OD pair, looks up the preference of its block
    pair and follows the preference-constrained search path. With
    probability detour_noise it instead passes through one random
    intermediate vertex. Output is a pure function of cfg.

    Args:
        cfg (SyntheticConfig): Generator parameters

    Returns:
        SyntheticWorld: Network, trajectories sorted by departure, ground truth

    Raises:
        ValueError: If cfg is invalid
        SyntheticGenerationError: If max_retries consecutive OD samples fail
    """
    cfg.validate()
    rng = np.random.default_rng(cfg.rng_seed)
    net = _build_grid(cfg, rng)
    n = net.num_vertices

    block_preferences = dict(cfg.planted_preferences)
    pool = tuple(cfg.preference_pool)
    generated = []
    detoured_index = set()

    while len(generated) < cfg.trajectory_count:
        for _ in range(cfg.max_retries):
            s, d = _sample_od(cfg, rng, n)
            if s == d or _hops(cfg, s, d) < cfg.min_hops:
                continue
            pair = (cfg.block_of(s), cfg.block_of(d))
            if pair not in block_preferences:
                block_preferences[pair] = pool[int(rng.integers(len(pool)))]
            preference = block_preferences[pair]
            detour = bool(rng.random() < cfg.detour_noise)
            try:
                if detour:
                    w = int(rng.integers(n))
                    if w in (s, d):
                        continue
                    path = preference_dijkstra(net, preference, s, w).concat(
                        preference_dijkstra(net, preference, w, d))
                else:
                    path = preference_dijkstra(net, preference, s, d)
            except NoPathError:
                continue
            if detour:
                detoured_index.add(len(generated))
            generated.append((path, preference))
            break
        else:
            raise SyntheticGenerationError(
                f"no reachable OD pair after {cfg.max_retries} attempts "
                f"({len(generated)} of {cfg.trajectory_count} trajectories generated)"
            )

    departures = np.sort(rng.integers(0, cfg.departure_span_s, size=len(generated)))
    drivers = rng.integers(0, cfg.driver_count, size=len(generated))

    trajectories = []
    trajectory_preferences = {}
    for i, (path, preference) in enumerate(generated):
        traj = Trajectory(i, int(drivers[i]), cfg.departure_start + int(departures[i]), path)
        trajectories.append(traj)
        trajectory_preferences[i] = preference

    return SyntheticWorld(
        network=net,
        trajectories=trajectories,
        block_preferences=block_preferences,
        trajectory_preferences=trajectory_preferences,
        detoured=detoured_index,
    )
