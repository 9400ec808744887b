# -*- coding: utf-8 -*-
"""
Applying preferences: preference-constrained search and B-edge population.

The constrained search minimizes the master cost, but at every settled
vertex that has at least one outgoing edge satisfying the slave road
condition only those edges are relaxed; otherwise all outgoing edges are.
The per-vertex rule is greedy, so the result is not necessarily the best
path among those respecting the condition.
"""

from .monitoring import pipeline_stats
from .netmodel import CostKind
from .parallel import SEQUENTIAL
from .preference import PreferenceVector
from .search import label_setting, lowest_cost_path
from .utils import equirectangular_distance, is_debug_enabled

DEFAULT_CENTER_CAP = 64


def _edge_selector(net, preference):
    if preference.slave is None:
        return None
    condition = preference.slave

    def select(u, edge_ids):
        satisfying = [e for e in edge_ids if condition.satisfied_by(net.edges[e])]
        return satisfying if satisfying else edge_ids

    return select


def preference_dijkstra(net, preference, s, d):
    """
    Path from s to d following a preference vector.

    Args:
        net (RoadNetwork): Road network
        preference (PreferenceVector): Master cost and optional slave condition
        s (int): Source vertex
        d (int): Destination vertex

    Returns:
        Path: Constrained lowest-cost path

    Raises:
        NoPathError: If d is not reached under the pruning rule
    """
    return lowest_cost_path(net, s, d, CostKind(preference.master),
                            select_edges=_edge_selector(net, preference))


def preference_search(net, preference, s, targets):
    """One constrained search from s settling all reachable targets."""
    return label_setting(net, s, CostKind(preference.master),
                         select_edges=_edge_selector(net, preference), targets=targets)


def _surrogate_center(net, region):
    """Member vertex nearest the region centroid (ties to the lower id)."""
    lon, lat = region.centroid
    return min(region.members,
               key=lambda v: (equirectangular_distance(net.vertices[v].lon, net.vertices[v].lat, lon, lat), v))


def capped_centers(net, model, from_region, to_region, cap=DEFAULT_CENTER_CAP):
    """
    Transfer centers used to populate one region edge.

    Regions without transfer centers use their surrogate center. While the
    pair count exceeds cap, the least popular center of the longer list is
    dropped (ties drop the higher vertex id).

    Returns:
        tuple: (sources, targets, capped) with sorted vertex lists
    """
    lists = []
    for region_id in (from_region, to_region):
        centers = dict(model.transfer_centers.get(region_id, {}))
        if not centers:
            centers = {_surrogate_center(net, model.region(region_id)): 0}
        lists.append(centers)

    capped = False
    while len(lists[0]) * len(lists[1]) > cap:
        longer = lists[0] if len(lists[0]) >= len(lists[1]) else lists[1]
        if len(longer) == 1:
            break
        drop = min(longer, key=lambda v: (longer[v], -v))
        del longer[drop]
        capped = True
    return sorted(lists[0]), sorted(lists[1]), capped


def _populate_edge(net, model, edge, null_preference, cap):
    preference = edge.preference if edge.preference is not None else null_preference
    sources, targets, capped = capped_centers(net, model, edge.from_region, edge.to_region, cap)
    paths = []
    for s in sources:
        remaining = [t for t in targets if t != s]
        found = {}
        if remaining:
            result = preference_search(net, preference, s, remaining)
            for t in remaining:
                if result.reached(t):
                    found[t] = result.path_to(net, t)
        for t in targets:
            if t in found:
                paths.append(found[t])
    return paths, capped


def populate_b_edge_paths(net, model, runner=SEQUENTIAL, cap=DEFAULT_CENTER_CAP):
    """
    Attach synthetic paths to every B-edge.

    For each pair of transfer centers (from-region × to-region) the B-edge's
    preference is applied; a null preference uses the fastest path. Paths
    get count 0 and the synthetic flag. A B-edge with no reachable pair is
    marked dead.

    Args:
        net (RoadNetwork): Road network
        model (RegionGraphModel): Model whose B-edges carry transferred or null preferences
        runner (ParallelRunner): Executor for the per-edge population
        cap (int): Maximum center pairs per edge

    Returns:
        RegionGraphModel: The same model, populated
    """
    null_preference = PreferenceVector(CostKind.TT)
    b_edges = model.b_edges()
    results = runner.map(lambda e: _populate_edge(net, model, e, null_preference, cap),
                         b_edges, label="Populate")

    dead = 0
    populated = 0
    capped_count = 0
    for edge, (paths, capped) in zip(b_edges, results):
        edge.paths = []
        for path in paths:
            edge.add_path(path, count=0, synthetic=True)
        edge.dead = not edge.paths
        dead += edge.dead
        populated += len(edge.paths)
        capped_count += capped
        if edge.dead and is_debug_enabled():
            print(f"[DEBUG] Dead B-edge R{edge.from_region} -> R{edge.to_region}")

    pipeline_stats.safe.increment('populated_paths', populated)
    pipeline_stats.safe.increment('dead_b_edges', dead)
    pipeline_stats.safe.increment('capped_center_pairs', capped_count)
    return model
