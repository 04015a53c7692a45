"""Dense distance graphs over cluster boundary vertices.

The weight of ``(a, b)`` is the length of a shortest ``a``-``b`` path inside
the cluster whose inner vertices avoid every other boundary vertex.  One BFS
per boundary vertex gives all weights together with a shortest path tree
that unpacks any edge back into cluster vertices.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

INF = math.inf


@dataclass
class DenseDistanceGraph:
    cluster_id: int
    vertices: list[int]
    weights: dict[tuple[int, int], int]
    trees: dict[int, dict[int, int]] = field(repr=False, default_factory=dict)

    def weight(self, a: int, b: int) -> float:
        if a == b:
            return 0
        return self.weights.get((a, b) if a < b else (b, a), INF)

    def edges(self) -> list[tuple[int, int, int]]:
        return [(a, b, w) for (a, b), w in sorted(self.weights.items())]

    def unpack(self, a: int, b: int) -> list[int]:
        """Cluster vertices of the stored shortest path from ``a`` to ``b``."""
        if a == b:
            return [a]
        if ((a, b) if a < b else (b, a)) not in self.weights:
            raise KeyError(f"no edge ({a}, {b}) in the dense distance graph")
        parent = self.trees[a]
        path = [b]
        x = b
        while x != a:
            x = parent[x]
            path.append(x)
        path.reverse()
        return path


def boundary_bfs(adj: dict[int, list[int]], boundary: set[int], source: int
                 ) -> tuple[dict[int, int], dict[int, int]]:
    """Distances and parents from ``source`` never passing through boundary vertices."""
    dist = {source: 0}
    parent = {source: -1}
    queue = deque([source])
    while queue:
        x = queue.popleft()
        if x != source and x in boundary:
            continue
        dx = dist[x] + 1
        for y in adj.get(x, ()):
            if y not in dist:
                dist[y] = dx
                parent[y] = x
                queue.append(y)
    return dist, parent


def dense_distance_graph(edges: Iterable[tuple[int, int]], boundary: Iterable[int],
                         cluster_id: int = -1) -> DenseDistanceGraph:
    """``D_{dC}(C)`` for the cluster given by its edge list and boundary set."""
    adj: dict[int, list[int]] = {}
    for a, b in edges:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    bset = set(boundary)
    verts = sorted(bset)
    weights: dict[tuple[int, int], int] = {}
    trees: dict[int, dict[int, int]] = {}
    for a in verts:
        dist, parent = boundary_bfs(adj, bset, a)
        trees[a] = parent
        for b in verts:
            if b > a and b in dist:
                weights[(a, b)] = dist[b]
    return DenseDistanceGraph(cluster_id, verts, weights, trees)


def cluster_ddg(g, cluster) -> DenseDistanceGraph:
    return dense_distance_graph(((g.eu[e], g.ev[e]) for e in cluster.edges),
                                cluster.boundary, cluster.id)


def restrict_ddg(full: DenseDistanceGraph, subset: Iterable[int]) -> DenseDistanceGraph:
    """The subgraph of ``full`` induced by ``subset``.

    Vertices of ``dC`` left out still count as boundary, so weights are the
    same as in ``full``.
    """
    keep = set(subset)
    if not keep <= set(full.vertices):
        raise ValueError("subset must lie inside the boundary of the cluster")
    verts = [v for v in full.vertices if v in keep]
    weights = {(a, b): w for (a, b), w in full.weights.items() if a in keep and b in keep}
    return DenseDistanceGraph(full.cluster_id, verts, weights,
                              {a: full.trees[a] for a in verts if a in full.trees})
