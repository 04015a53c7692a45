"""Greedy multiplicative spanners for weighted graphs.

Edges are scanned by increasing weight and kept only when the spanner built
so far has no path of length ``<= t * w`` between the endpoints.  Every
dropped edge is then stretched by at most ``t`` and, by induction, so is
every shortest path.  The result has girth above ``t + 1``, which keeps the
edge count within ``O(|V|^{1 + 1/floor((t+1)/2)})``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable


@dataclass
class Spanner:
    stretch: float
    vertices: list[int]
    edges: list[tuple[int, int, float]]

    def __len__(self) -> int:
        return len(self.edges)


def stretch_for(epsilon: float) -> float:
    """``1/epsilon``, snapped to the nearest simple fraction to avoid 3.0000000000000004."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    return float(1 / Fraction(epsilon).limit_denominator(10**6))


def size_budget(nv: int, epsilon: float, coef: float = 2.0) -> float:
    return coef * max(nv, 1) ** (1 + 2 * epsilon)


def _within(adj: dict[int, list[tuple[int, float]]], s: int, t: int, bound: float) -> bool:
    """Is there an ``s``-``t`` path of length at most ``bound``?"""
    if s == t:
        return True
    dist = {s: 0.0}
    heap = [(0.0, s)]
    while heap:
        d, x = heapq.heappop(heap)
        if d > dist.get(x, math.inf):
            continue
        if x == t:
            return True
        for y, w in adj.get(x, ()):
            nd = d + w
            if nd <= bound and nd < dist.get(y, math.inf):
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return False


def build_spanner(edges: Iterable[tuple[int, int, float]], epsilon: float,
                  vertices: Iterable[int] | None = None) -> Spanner:
    """A ``(1/epsilon)``-spanner of the graph given by weighted edges."""
    t = stretch_for(epsilon)
    elist = sorted((float(w), min(a, b), max(a, b)) for a, b, w in edges)
    if any(w < 0 for w, _, _ in elist):
        raise ValueError("edge weights must be non-negative")
    verts = set(vertices or ())
    adj: dict[int, list[tuple[int, float]]] = {}
    kept: list[tuple[int, int, float]] = []
    for w, a, b in elist:
        verts.add(a)
        verts.add(b)
        if a == b:
            continue
        if _within(adj, a, b, t * w):
            continue
        adj.setdefault(a, []).append((b, w))
        adj.setdefault(b, []).append((a, w))
        kept.append((a, b, w))
    return Spanner(t, sorted(verts), kept)
