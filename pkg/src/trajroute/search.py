# -*- coding: utf-8 -*-
"""
Label-settling shortest path search over the road network.

One heapq engine serves plain lowest-cost search, the preference-constrained
variant (through an edge selection callback), backward searches on the reverse
graph and one-to-many searches.
"""

import heapq
from dataclasses import dataclass, field

from .netmodel import CostKind, NoPathError, Path


@dataclass
class SearchResult:
    """Settled distances and predecessor edges of one search."""
    origin: int
    reverse: bool
    dist: dict = field(default_factory=dict)
    pred: dict = field(default_factory=dict)
    settled: list = field(default_factory=list)

    def reached(self, vertex):
        return vertex in self.dist

    def path_to(self, net, vertex):
        """
        Path between the origin and a settled vertex.

        A forward search returns origin→vertex; a reverse search returns
        vertex→origin, both in travel direction.

        Raises:
            NoPathError: If the vertex was not reached
        """
        if vertex not in self.dist:
            if self.reverse:
                raise NoPathError(vertex, self.origin)
            raise NoPathError(self.origin, vertex)

        vertices = [vertex]
        edges = []
        current = vertex
        while current != self.origin:
            eid = self.pred[current]
            edge = net.edges[eid]
            current = edge.target if self.reverse else edge.source
            vertices.append(current)
            edges.append(eid)

        if self.reverse:
            return Path(tuple(vertices), tuple(edges))
        return Path(tuple(reversed(vertices)), tuple(reversed(edges)))


def label_setting(net, origin, kind=CostKind.TT, *, reverse=False, select_edges=None,
                  targets=None, stop=None):
    """
    Dijkstra search from one origin.

    Heap entries are (cost, vertex id), so equal costs settle the lower
    vertex id first; a label is only replaced by a strictly smaller one.

    Args:
        net (RoadNetwork): Road network
        origin (int): Start vertex (the destination for a reverse search)
        kind (CostKind): Weight table to minimize
        reverse (bool): Search the reverse graph (incoming edges)
        select_edges (callable): f(vertex, edge_ids) -> edge ids to relax
                                 from a settled vertex (default: all)
        targets (iterable[int]): Stop once all of these are settled
        stop (callable): f(vertex) -> bool, stop right after settling vertex

    Returns:
        SearchResult: Settled distances, predecessor edges, settle order
    """
    net.vertex(origin)
    weights = net.weights(kind)
    adjacency = net.in_edges if reverse else net.out_edges
    remaining = set(targets) if targets is not None else None

    result = SearchResult(origin=origin, reverse=reverse)
    best = {origin: 0.0}
    heap = [(0.0, origin)]

    while heap:
        cost, u = heapq.heappop(heap)
        if u in result.dist:
            continue
        result.dist[u] = cost
        result.settled.append(u)

        if stop is not None and stop(u):
            break
        if remaining is not None:
            remaining.discard(u)
            if not remaining:
                break

        candidates = adjacency(u)
        if select_edges is not None:
            candidates = select_edges(u, candidates)

        for eid in candidates:
            edge = net.edges[eid]
            v = edge.source if reverse else edge.target
            if v in result.dist:
                continue
            new_cost = cost + weights[eid]
            previous = best.get(v)
            if previous is None or new_cost < previous:
                best[v] = new_cost
                result.pred[v] = eid
                heapq.heappush(heap, (new_cost, v))

    return result


def lowest_cost_path(net, source, target, kind=CostKind.TT, select_edges=None):
    """
    Cost-minimal path from source to target.

    Raises:
        KeyError: If either vertex is unknown
        NoPathError: If target is unreachable
    """
    net.vertex(target)
    if source == target:
        net.vertex(source)
        return Path.single(source)
    result = label_setting(net, source, kind, select_edges=select_edges, targets=(target,))
    return result.path_to(net, target)


def fastest_path(net, source, target):
    """Travel-time-minimal path (raises NoPathError if unreachable)."""
    return lowest_cost_path(net, source, target, CostKind.TT)


def shortest_path(net, source, target):
    """Distance-minimal path (raises NoPathError if unreachable)."""
    return lowest_cost_path(net, source, target, CostKind.DI)
