# -*- coding: utf-8 -*-
"""
Trajectory graph and road-type constrained bottom-up clustering.

Vertices traversed by trajectories are merged greedily, most popular first,
whenever the modularity gain of a merge is positive and the road types of
the merged vertices and the connecting edges agree. Each final cluster
vertex is a region.

Both TrajectoryGraph (vertex level) and ClusterState (cluster level)
expose the same small interface, so modularity_gain, check_qualification
and select_merge work on either:

    total                       fixed sum S of edge popularities
    popularity(x)               S_x
    link_popularity(x, y)       s_xy (0 if not adjacent)
    link_road_types(x, y)       set of road types on the x-y link
    neighbors(x)                adjacent ids
    is_aggregate(x)             True for merged vertices
    road_type(x)                RoadType of an aggregate, None for simple
"""

import heapq
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist
from shapely.geometry import MultiPoint

from .monitoring import pipeline_stats
from .utils import equirectangular_xy, is_debug_enabled


class TrajectoryGraph:
    """
    Undirected trajectory graph.

    s_ij counts traversals of either directed road edge between i and j.
    The road type of an undirected edge is taken from the lowest-id
    directed road edge between its endpoints.
    """

    def __init__(self, net):
        self.net = net
        self._adj = {}
        self._road_type = {}
        self._popularity = {}
        self.total = 0

    @property
    def vertices(self):
        return sorted(self._adj)

    @property
    def edge_count(self):
        return sum(len(nbrs) for nbrs in self._adj.values()) // 2

    def edges(self):
        """Yield (u, v, s_uv, road_type) with u < v, sorted."""
        for u in sorted(self._adj):
            for v in sorted(self._adj[u]):
                if u < v:
                    yield u, v, self._adj[u][v], self._road_type[(u, v)]

    def add_traversal(self, edge_id):
        edge = self.net.edges[edge_id]
        u, v = edge.source, edge.target
        if u == v:
            return
        key = (min(u, v), max(u, v))
        if key not in self._road_type:
            lowest = min(e for e in (self.net.edge_between(u, v), self.net.edge_between(v, u)) if e is not None)
            self._road_type[key] = self.net.edges[lowest].road_type
        self._adj.setdefault(u, {})
        self._adj.setdefault(v, {})
        self._adj[u][v] = self._adj[u].get(v, 0) + 1
        self._adj[v][u] = self._adj[u][v]
        self._popularity[u] = self._popularity.get(u, 0) + 1
        self._popularity[v] = self._popularity.get(v, 0) + 1
        self.total += 1

    # interface shared with ClusterState

    def popularity(self, x):
        return self._popularity.get(x, 0)

    def link_popularity(self, x, y):
        return self._adj.get(x, {}).get(y, 0)

    def link_road_types(self, x, y):
        key = (min(x, y), max(x, y))
        return {self._road_type[key]} if key in self._road_type else set()

    def neighbors(self, x):
        return sorted(self._adj.get(x, {}))

    def is_aggregate(self, x):
        return False

    def road_type(self, x):
        return None


def build_trajectory_graph(net, trajectories):
    """
    Count edge traversals of all trajectories into a trajectory graph.

    Args:
        net (RoadNetwork): Road network
        trajectories (iterable[Trajectory]): Validated trajectories

    Returns:
        TrajectoryGraph: Graph over traversed vertices (empty if no trajectories)
    """
    tg = TrajectoryGraph(net)
    for traj in trajectories:
        for eid in traj.path.edges:
            tg.add_traversal(eid)
    return tg


def modularity_gain(graph, u, v):
    """
    Modularity gain of merging u and v: s_uv/S - S_u*S_v/S^2, 0 if not adjacent.

    Raises:
        ValueError: If u == v
    """
    if u == v:
        raise ValueError(f"cannot merge vertex {u} with itself")
    s_uv = graph.link_popularity(u, v)
    if s_uv == 0 or graph.total == 0:
        return 0.0
    total = float(graph.total)
    return s_uv / total - (graph.popularity(u) * graph.popularity(v)) / (total * total)


def check_qualification(graph, k, j):
    """
    Whether j may merge into k.

    The gain must be strictly positive. Road types must also agree:
        simple k, simple j:       no extra condition
        simple k, aggregate j:    j.RT equals the k-j link type
        aggregate k, simple j:    k.RT equals the k-j link type
        aggregate k, aggregate j: j.RT equals k.RT
    """
    if modularity_gain(graph, k, j) <= 0:
        return False
    k_agg = graph.is_aggregate(k)
    j_agg = graph.is_aggregate(j)
    if not k_agg and not j_agg:
        return True
    if k_agg and j_agg:
        return graph.road_type(j) == graph.road_type(k)
    anchor = graph.road_type(k) if k_agg else graph.road_type(j)
    return graph.link_road_types(k, j) == {anchor}


def select_merge(graph, k, qualified):
    """
    Subset of the qualified neighbors that actually merge into k.

    An aggregate k takes all of them. A simple k takes the largest group
    whose links to k share one road type; ties go to the lower road type.

    Returns:
        list: Selected neighbor ids, sorted
    """
    qualified = sorted(qualified)
    if not qualified or graph.is_aggregate(k):
        return qualified

    groups = {}
    for j in qualified:
        types = graph.link_road_types(k, j)
        if len(types) != 1:
            continue
        groups.setdefault(next(iter(types)), []).append(j)
    if not groups:
        return []
    best_type = min(groups, key=lambda rt: (-len(groups[rt]), int(rt)))
    return groups[best_type]


@dataclass
class ClusterVertex:
    members: frozenset
    popularity: int
    road_type: object = None

    @property
    def is_aggregate(self):
        return len(self.members) > 1

    @property
    def min_member(self):
        return min(self.members)


@dataclass(frozen=True)
class MergeRecord:
    kept: int
    absorbed: int
    gain: float
    kind: str


@dataclass(frozen=True)
class Region:
    region_id: int
    members: tuple
    road_type: object
    centroid: tuple

    def to_dict(self, net=None):
        members = list(self.members)
        if net is not None:
            members = [net.original_vertex_id(v) for v in members]
        return {
            "region_id": self.region_id,
            "road_type": self.road_type.label if self.road_type is not None else None,
            "member_ids": members,
            "centroid": list(self.centroid),
        }


class ClusterState:
    """
    Mutable cluster graph during bottom-up clustering.

    Cluster ids start as the vertex ids; a merge keeps the id of the
    cluster popped from the queue. Links carry summed popularity and the
    set of underlying road types. S stays fixed at the trajectory graph's total.
    """

    def __init__(self, tg):
        self.total = tg.total
        self.clusters = {}
        self.links = {}
        for v in tg.vertices:
            self.clusters[v] = ClusterVertex(frozenset((v,)), tg.popularity(v))
            self.links[v] = {
                w: [tg.link_popularity(v, w), set(tg.link_road_types(v, w))]
                for w in tg.neighbors(v)
            }

    def popularity(self, x):
        return self.clusters[x].popularity

    def link_popularity(self, x, y):
        link = self.links[x].get(y)
        return link[0] if link else 0

    def link_road_types(self, x, y):
        link = self.links[x].get(y)
        return set(link[1]) if link else set()

    def neighbors(self, x):
        return sorted(self.links[x])

    def is_aggregate(self, x):
        return self.clusters[x].is_aggregate

    def road_type(self, x):
        return self.clusters[x].road_type

    def cut(self, x, y):
        self.links[x].pop(y, None)
        self.links[y].pop(x, None)

    def merge(self, k, j, road_type):
        """Absorb cluster j into cluster k."""
        absorbed = self.clusters.pop(j)
        kept = self.clusters[k]
        self.clusters[k] = ClusterVertex(
            kept.members | absorbed.members,
            kept.popularity + absorbed.popularity,
            road_type,
        )
        self.links[k].pop(j, None)
        for w, (s, types) in self.links.pop(j).items():
            if w == k:
                continue
            del self.links[w][j]
            if w in self.links[k]:
                self.links[k][w][0] += s
                self.links[k][w][1] |= types
            else:
                self.links[k][w] = [s, set(types)]
            self.links[w][k] = self.links[k][w]


class BottomUpClusterer:
    """
    Road-type constrained agglomerative clustering.

    The queue pops the most popular cluster vertex; ties go to the smaller
    minimum member id. Stale queue entries are skipped by version number.
    """

    def __init__(self, tg):
        self.tg = tg
        self.state = ClusterState(tg)
        self.merge_log = []
        self.edges_cut = 0
        self.extractions = 0
        self._version = {}
        self._heap = []

    def _push(self, cid):
        version = self._version.get(cid, 0) + 1
        self._version[cid] = version
        cluster = self.state.clusters[cid]
        heapq.heappush(self._heap, (-cluster.popularity, cluster.min_member, cid, version))

    def run(self):
        """
        Cluster until the queue is empty.

        Returns:
            list[ClusterVertex]: Final clusters, ordered by minimum member id
        """
        state = self.state
        for cid in state.clusters:
            self._push(cid)

        final = []
        while self._heap:
            _, _, k, version = heapq.heappop(self._heap)
            if k not in state.clusters or self._version.get(k) != version:
                continue
            self.extractions += 1

            adjacent = state.neighbors(k)
            if not adjacent:
                final.append(state.clusters.pop(k))
                continue

            gains = {j: modularity_gain(state, k, j) for j in adjacent}
            qualified = [j for j in adjacent if check_qualification(state, k, j)]
            selected = select_merge(state, k, qualified)

            for j in adjacent:
                if j not in selected:
                    state.cut(k, j)
                    self.edges_cut += 1

            if not selected:
                # only cuts happened; k goes back to the queue with no change in popularity
                self._push(k)
                continue

            if state.is_aggregate(k):
                road_type = state.road_type(k)
            else:
                first = selected[0]
                road_type = state.road_type(first) if state.is_aggregate(first) \
                    else next(iter(state.link_road_types(k, first)))

            for j in selected:
                kind = ("A" if state.is_aggregate(k) else "S") + ("A" if state.is_aggregate(j) else "S")
                gain = gains[j]
                assert gain > 0, f"merge of {k} and {j} with non-positive gain {gain}"
                self.merge_log.append(MergeRecord(k, j, gain, kind))
                if is_debug_enabled():
                    print(f"[DEBUG] Merge{kind}: {k} <- {j} (gain {gain:.6f})")
                state.merge(k, j, road_type)
                self._version.pop(j, None)

            self._push(k)

        final.sort(key=lambda c: c.min_member)
        return final


def bottom_up_clustering(tg):
    """
    Cluster a trajectory graph into regions.

    Args:
        tg (TrajectoryGraph): Trajectory graph

    Returns:
        list[Region]: Regions numbered 0.. by minimum member id
    """
    clusterer = BottomUpClusterer(tg)
    clusters = clusterer.run()

    regions = []
    for region_id, cluster in enumerate(clusters):
        members = tuple(sorted(cluster.members))
        lons = [tg.net.vertices[v].lon for v in members]
        lats = [tg.net.vertices[v].lat for v in members]
        centroid = (float(np.mean(lons)), float(np.mean(lats)))
        road_type = cluster.road_type if cluster.is_aggregate else None
        regions.append(Region(region_id, members, road_type, centroid))

    pipeline_stats.safe.increment('merges', len(clusterer.merge_log))
    pipeline_stats.safe.increment('edges_cut', clusterer.edges_cut)
    pipeline_stats.safe.increment('regions', len(regions))
    pipeline_stats.safe.increment('singleton_regions', sum(1 for r in regions if len(r.members) == 1))
    return regions


def region_size_stats(regions, net):
    """
    Convex-hull area and diameter of every region.

    Member coordinates are projected equirectangularly around the region
    centroid before measuring.

    Returns:
        list[dict]: {region_id, member_count, area_km2, diameter_km}
    """
    stats = []
    for region in regions:
        lat0 = region.centroid[1]
        points = [equirectangular_xy(net.vertices[v].lon, net.vertices[v].lat, lat0)
                  for v in region.members]
        hull = MultiPoint(points).convex_hull
        area_km2 = hull.area / 1e6
        if hull.geom_type == "Polygon":
            corners = np.asarray(hull.exterior.coords)
        else:
            corners = np.asarray(hull.coords)
        diameter_km = float(pdist(corners).max()) / 1000.0 if len(corners) > 1 else 0.0
        stats.append({
            "region_id": region.region_id,
            "member_count": len(region.members),
            "area_km2": float(area_km2),
            "diameter_km": diameter_km,
        })
    return stats


def size_histogram(stats, bands_km2=(2.0, 5.0, 10.0)):
    """
    Bucket region areas.

    Args:
        stats (list[dict]): Output of region_size_stats
        bands_km2 (sequence[float]): Increasing upper bounds

    Returns:
        dict: label -> count, e.g. {"(0,2]": 3, ..., ">10": 0}; zero-area
              regions count in the first band
    """
    bounds = [0.0] + [float(b) for b in bands_km2]
    labels = [f"({_fmt(lo)},{_fmt(hi)}]" for lo, hi in zip(bounds, bounds[1:])]
    labels.append(f">{_fmt(bounds[-1])}")
    histogram = {label: 0 for label in labels}
    for entry in stats:
        area = entry["area_km2"]
        for label, hi in zip(labels, bounds[1:]):
            if area <= hi:
                histogram[label] += 1
                break
        else:
            histogram[labels[-1]] += 1
    return histogram


def _fmt(value):
    return f"{value:g}"
