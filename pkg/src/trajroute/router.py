# -*- coding: utf-8 -*-
"""
Unified routing over the region graph.

A query whose endpoints both lie in regions is answered from the region
graph: a greedy best-first search picks region edges that lead toward the
destination region, and the chosen region-edge paths are stitched together
with recorded inner-region paths (or fastest connectors). Queries with an
endpoint outside all regions first search for the nearest region with a
fastest-path search and fall back to the plain fastest path when no
useful region is found.
"""

import heapq
from dataclasses import dataclass, field

from .monitoring import pipeline_stats
from .netmodel import CostKind, NoPathError, path_cost
from .search import fastest_path, label_setting
from .utils import equirectangular_distance, is_debug_enabled

SAME_REGION = "SameRegion"
IN_REGION = "InRegion"
IN_OUT_REGION = "InOutRegion"
OUT_REGION = "OutRegion"


class NoRouteError(LookupError):
    """No live region-edge sequence connects two regions."""

    def __init__(self, from_region, to_region):
        self.from_region = from_region
        self.to_region = to_region
        super().__init__(f"no region route from R{from_region} to R{to_region}")


class StitchError(RuntimeError):
    """Two consecutive pieces of a region path cannot be joined inside a region."""

    def __init__(self, region_id, source, target):
        self.region_id = region_id
        super().__init__(f"cannot stitch {source}→{target} in region R{region_id}")


@dataclass
class RouteResult:
    path: object
    tag: str
    region_path: list = field(default_factory=list)
    fallback: bool = False

    def to_json(self, net):
        """JSON-ready result with original vertex ids and the three path costs."""
        return {
            "path": [net.original_vertex_id(v) for v in self.path.vertices],
            "tag": self.tag,
            "costs": {kind.value: path_cost(net, self.path, kind) for kind in CostKind},
        }


def _live(edge):
    return not edge.dead and bool(edge.paths)


def _centroid_distance(model, a, b):
    ca = model.region(a).centroid
    cb = model.region(b).centroid
    return equirectangular_distance(ca[0], ca[1], cb[0], cb[1])


def route_region_graph(model, from_region, to_region):
    """
    Region-edge sequence from one region to another.

    Regions are expanded in order of centroid distance to the destination
    region (ties to the lower region id). A live edge straight into the
    destination is taken as soon as its region is expanded. Expanded
    regions are never revisited, and a dead end simply continues with the
    next best frontier region. Dead and pathless edges are skipped.

    Args:
        model (RegionGraphModel): Region graph
        from_region (int): Source region id
        to_region (int): Destination region id

    Returns:
        list[RegionEdge]: Region edges in travel order

    Raises:
        ValueError: If both regions are the same
        NoRouteError: If the destination region is unreachable
    """
    if from_region == to_region:
        raise ValueError("source and destination regions must differ")
    model.region(from_region)
    model.region(to_region)

    parent = {from_region: None}
    heap = [(_centroid_distance(model, from_region, to_region), from_region)]
    expanded = set()

    while heap:
        _, region = heapq.heappop(heap)
        if region in expanded:
            continue
        expanded.add(region)

        direct = model.edge_between(region, to_region)
        if direct is not None and _live(direct):
            sequence = [direct]
            while parent[region] is not None:
                sequence.append(parent[region])
                region = parent[region].from_region
            return list(reversed(sequence))

        for edge in model.out_edges(region):
            nxt = edge.to_region
            if nxt in parent or not _live(edge):
                continue
            parent[nxt] = edge
            heapq.heappush(heap, (_centroid_distance(model, nxt, to_region), nxt))

    raise NoRouteError(from_region, to_region)


def _rank_key(net, record):
    return (-record.count, path_cost(net, record.path, CostKind.TT), record.path.vertices)


def best_edge_path(net, edge):
    """Highest-ranked path of a region edge: count desc, then travel time, then vertices."""
    if not edge.paths:
        raise NoRouteError(edge.from_region, edge.to_region)
    return min(edge.paths, key=lambda r: _rank_key(net, r)).path


def _connector(model, net, region_id, source, target):
    if source == target:
        return None
    inner = model.best_inner_path(region_id, source, target)
    if inner is not None:
        return inner
    try:
        return fastest_path(net, source, target)
    except NoPathError:
        raise StitchError(region_id, source, target) from None


def expand_region_path(model, net, region_path, entry_vertex, exit_vertex):
    """
    Road path for a region path.

    Each region edge contributes its best path. Consecutive pieces are
    joined inside the shared region by the most-traversed recorded inner
    path between the two vertices, or else by the fastest path. The entry
    vertex is joined to the first piece inside the first region and the
    last piece to the exit vertex inside the last region.

    Raises:
        ValueError: If region_path is empty
        StitchError: If a gap cannot be joined (names the region)
    """
    if not region_path:
        raise ValueError("region path must not be empty")

    result = None
    current = entry_vertex
    region = region_path[0].from_region
    for edge in region_path:
        piece = best_edge_path(net, edge)
        connector = _connector(model, net, region, current, piece.source)
        for part in (connector, piece):
            if part is None:
                continue
            result = part if result is None else result.concat(part)
        current = piece.target
        region = edge.to_region

    connector = _connector(model, net, region, current, exit_vertex)
    if connector is not None:
        result = result.concat(connector)
    return result


def _nearest_region_vertex(net, model, origin, goal, reverse):
    """First settled region vertex of a TT search (forward or on the reverse graph)."""
    result = label_setting(net, origin, CostKind.TT, reverse=reverse,
                           stop=lambda u: u in model.region_of or u == goal)
    if not result.settled:
        return None, None
    last = result.settled[-1]
    if last not in model.region_of:
        return None, result
    return last, result


def _region_route(model, net, s, d, r_s, r_d):
    region_path = route_region_graph(model, r_s, r_d)
    return expand_region_path(model, net, region_path, s, d), region_path


def route(model, net, s, d, departure=None):
    """
    Answer one routing query.

    Args:
        model (RegionGraphModel): Region graph with populated region edges
        net (RoadNetwork): Road network
        s (int): Source vertex
        d (int): Destination vertex
        departure (int): Departure time in epoch seconds; the model for its
                         time window is chosen by the caller

    Returns:
        RouteResult: Path from s to d with its case tag

    Raises:
        KeyError: If s or d is unknown
        NoPathError: If d is unreachable from s
    """
    net.vertex(s)
    net.vertex(d)
    pipeline_stats.safe.increment('routes')
    r_s = model.region_of.get(s)
    r_d = model.region_of.get(d)

    if r_s is not None and r_d is not None:
        if r_s == r_d:
            inner = model.best_inner_path(r_s, s, d)
            path = inner if inner is not None else fastest_path(net, s, d)
            return RouteResult(path, SAME_REGION)
        try:
            path, region_path = _region_route(model, net, s, d, r_s, r_d)
            return RouteResult(path, IN_REGION, region_path)
        except NoRouteError:
            pipeline_stats.safe.increment('region_search_fallbacks')
            if is_debug_enabled():
                print(f"[DEBUG] No region route R{r_s} -> R{r_d}, using fastest path")
            return RouteResult(fastest_path(net, s, d), IN_REGION, fallback=True)

    tag = IN_OUT_REGION if (r_s is not None or r_d is not None) else OUT_REGION
    entry, forward = _nearest_region_vertex(net, model, s, d, reverse=False)
    exit_, backward = _nearest_region_vertex(net, model, d, s, reverse=True)
    if entry is None or exit_ is None or model.region_of[entry] == model.region_of[exit_]:
        return RouteResult(fastest_path(net, s, d), tag, fallback=True)

    try:
        middle, region_path = _region_route(model, net, entry, exit_,
                                            model.region_of[entry], model.region_of[exit_])
    except NoRouteError:
        pipeline_stats.safe.increment('region_search_fallbacks')
        return RouteResult(fastest_path(net, s, d), tag, fallback=True)

    path = forward.path_to(net, entry).concat(middle).concat(backward.path_to(net, exit_))
    if is_debug_enabled():
        print(f"[DEBUG] {tag}: entry {entry} (R{model.region_of[entry]}) and exit "
              f"{exit_} (R{model.region_of[exit_]})")
    return RouteResult(path, tag, region_path)
