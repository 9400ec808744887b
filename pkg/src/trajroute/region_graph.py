# -*- coding: utf-8 -*-
"""
Region graph construction.

Trajectories crossing regions produce T-edges carrying the observed
connecting paths, record transfer centers where they enter and leave
regions, and leave inner-region paths behind. A breadth-first search from
every region then adds B-edges between physically adjacent regions that
no trajectory connects, so the region graph is connected whenever the
road network is.
"""

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .monitoring import pipeline_stats
from .netmodel import Path
from .parallel import SEQUENTIAL
from .utils import is_debug_enabled

T_EDGE = "T"
B_EDGE = "B"


@dataclass
class PathRecord:
    path: object
    count: int
    synthetic: bool = False


@dataclass
class RegionEdge:
    """
    Directed edge of the region graph.

    T-edges hold trajectory paths with traversal counts. B-edges start
    pathless and receive synthetic paths (count 0) once their transferred
    preference is applied; a B-edge whose center pairs are all unreachable
    is marked dead.
    """
    edge_id: int
    from_region: int
    to_region: int
    kind: str
    paths: list = field(default_factory=list)
    preference: Optional[object] = None
    preference_source: Optional[str] = None
    features: Optional[object] = None
    dead: bool = False

    @property
    def is_t_edge(self):
        return self.kind == T_EDGE

    def add_path(self, path, count=1, synthetic=False):
        """Add a path, merging counts with an existing record of the same vertex sequence."""
        for record in self.paths:
            if record.path.vertices == path.vertices:
                record.count += count
                return record
        record = PathRecord(path, count, synthetic)
        self.paths.append(record)
        return record


class RegionGraphModel:
    """Regions, directed region edges, transfer centers and inner-region paths."""

    def __init__(self, regions):
        self.regions = list(regions)
        self.region_of = {}
        for region in self.regions:
            for v in region.members:
                self.region_of[v] = region.region_id
        self.edges = []
        self._edge_index = {}
        self._out = {r.region_id: [] for r in self.regions}
        self.transfer_centers = {r.region_id: {} for r in self.regions}
        self.inner_paths = {r.region_id: [] for r in self.regions}

    def region(self, region_id):
        return self.regions[region_id]

    def add_edge(self, from_region, to_region, kind):
        if from_region == to_region:
            raise ValueError(f"region edge must join two regions, got {from_region} twice")
        edge = RegionEdge(len(self.edges), from_region, to_region, kind)
        self.edges.append(edge)
        self._edge_index[(from_region, to_region)] = edge.edge_id
        self._out[from_region].append(edge)
        return edge

    def edge_between(self, from_region, to_region):
        eid = self._edge_index.get((from_region, to_region))
        return self.edges[eid] if eid is not None else None

    def out_edges(self, region_id):
        return list(self._out.get(region_id, ()))

    def t_edges(self):
        return [e for e in self.edges if e.kind == T_EDGE]

    def b_edges(self):
        return [e for e in self.edges if e.kind == B_EDGE]

    def record_center(self, region_id, vertex, count=1):
        centers = self.transfer_centers[region_id]
        centers[vertex] = centers.get(vertex, 0) + count

    def centers(self, region_id):
        """Transfer centers of a region, sorted by vertex id."""
        return sorted(self.transfer_centers[region_id])

    def add_inner_path(self, region_id, path, count=1):
        for record in self.inner_paths[region_id]:
            if record.path.vertices == path.vertices:
                record.count += count
                return record
        record = PathRecord(path, count)
        self.inner_paths[region_id].append(record)
        return record

    def best_inner_path(self, region_id, source, target):
        """Most traversed recorded inner path from source to target, or None."""
        candidates = [r for r in self.inner_paths.get(region_id, [])
                      if r.path.source == source and r.path.target == target]
        if not candidates:
            return None
        return min(candidates, key=lambda r: (-r.count, r.path.vertices)).path


def _segments(path, region_of):
    """Maximal runs of consecutive vertices in one region: (region, start, end)."""
    segments = []
    current = None
    start = 0
    for i, v in enumerate(path.vertices):
        region = region_of.get(v)
        if region != current:
            if current is not None:
                segments.append((current, start, i - 1))
            current = region
            start = i
    if current is not None:
        segments.append((current, start, len(path.vertices) - 1))
    return segments


def _slice(path, start, end):
    return Path(path.vertices[start:end + 1], path.edges[start:end])


def build_t_edges(regions, trajectories, model=None):
    """
    Create T-edges, transfer centers and inner-region paths from trajectories.

    For every ordered pair of regions (R_i, R_j) whose first visits occur in
    that order, the connecting path runs from where the trajectory last left
    R_i before first entering R_j to that entry vertex. Identical paths are
    aggregated by count.

    Args:
        regions (list[Region]): Regions from clustering
        trajectories (iterable[Trajectory]): Training trajectories
        model (RegionGraphModel): Model to extend (default: a new one)

    Returns:
        RegionGraphModel: Model with T-edges
    """
    if model is None:
        model = RegionGraphModel(regions)

    for traj in trajectories:
        path = traj.path
        segments = _segments(path, model.region_of)
        last = len(path.vertices) - 1

        for region, start, end in segments:
            if start > 0:
                model.record_center(region, path.vertices[start])
            if end < last:
                model.record_center(region, path.vertices[end])
            model.add_inner_path(region, _slice(path, start, end))

        first_visit = {}
        for index, (region, _, _) in enumerate(segments):
            first_visit.setdefault(region, index)
        order = sorted(first_visit, key=first_visit.get)

        for a, r_i in enumerate(order):
            for r_j in order[a + 1:]:
                entry_index = first_visit[r_j]
                exit_segment = max(s for s in range(entry_index) if segments[s][0] == r_i)
                exit_pos = segments[exit_segment][2]
                entry_pos = segments[entry_index][1]
                edge = model.edge_between(r_i, r_j)
                if edge is None:
                    edge = model.add_edge(r_i, r_j, T_EDGE)
                edge.add_path(_slice(path, exit_pos, entry_pos))

    return model


def extract_inner_paths(regions, trajectories):
    """
    Inner-region paths of every region.

    Returns:
        dict: region_id -> list[PathRecord]
    """
    return build_t_edges(regions, trajectories).inner_paths


def _reached_regions(net, model, region):
    """Regions reached by BFS from all members of one region, stopping at foreign regions."""
    home = region.region_id
    seen = set(region.members)
    queue = deque(sorted(region.members))
    reached = set()
    while queue:
        u = queue.popleft()
        for eid in net.out_edges(u) + net.in_edges(u):
            edge = net.edges[eid]
            w = edge.target if edge.source == u else edge.source
            if w in seen:
                continue
            seen.add(w)
            other = model.region_of.get(w)
            if other is not None and other != home:
                reached.add(other)
                continue
            queue.append(w)
    return reached


def build_b_edges(net, model, runner=SEQUENTIAL):
    """
    Add B-edges between regions that touch in the road network.

    The search explores road edges in both orientations. For every region
    pair found, each direction lacking a region edge gets a pathless B-edge.

    Args:
        net (RoadNetwork): Road network
        model (RegionGraphModel): Model with T-edges
        runner (ParallelRunner): Executor for the per-region searches

    Returns:
        RegionGraphModel: The same model, extended
    """
    reached = runner.map(lambda region: _reached_regions(net, model, region),
                         model.regions, label="BFS")

    added = 0
    for region, others in zip(model.regions, reached):
        for other in sorted(others):
            for a, b in ((region.region_id, other), (other, region.region_id)):
                if model.edge_between(a, b) is None:
                    model.add_edge(a, b, B_EDGE)
                    added += 1
                    if is_debug_enabled():
                        print(f"[DEBUG] B-edge R{a} -> R{b}")

    pipeline_stats.safe.increment('t_edges', len(model.t_edges()))
    pipeline_stats.safe.increment('b_edges', added)
    pipeline_stats.safe.increment('transfer_centers', sum(len(c) for c in model.transfer_centers.values()))
    pipeline_stats.safe.increment('inner_paths', sum(len(p) for p in model.inner_paths.values()))
    return model


def region_components(model):
    """Number of weakly connected components of the region graph."""
    n = len(model.regions)
    if n == 0:
        return 0
    rows = [e.from_region for e in model.edges]
    cols = [e.to_region for e in model.edges]
    adjacency = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
    count, _ = connected_components(adjacency, directed=True, connection="weak")
    return int(count)


def build_region_graph(net, regions, trajectories, runner=SEQUENTIAL):
    """T-edges, transfer centers and inner paths, then B-edges."""
    model = build_t_edges(regions, trajectories)
    build_b_edges(net, model, runner=runner)
    components = region_components(model)
    if components > 1:
        print(f"[!] Region graph has {components} components (road network is not connected)")
    return model
