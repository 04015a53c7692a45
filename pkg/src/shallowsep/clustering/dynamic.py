"""Components of ``G - X`` maintained through a nested clustering.

Vertices are passive, active or retired (active once, then passive for
good).  ``X`` is the active set.  Each cluster ``C`` keeps its X-clusters:
the components of ``C - (dC n X)`` that contain a passive boundary vertex.
Components of ``C - (dC n X)`` without one are kept as well, since they are
whole components of ``G - X`` that live inside ``C``.

``refine_cx`` starts from the level-1 clusters and replaces every cluster
with an active interior vertex by its children, so that all of ``X`` sits on
cluster boundaries.  Components of ``G - X`` are then recovered by gluing
X-clusters at shared passive boundary vertices.

Per-cluster X-clusters, restricted dense distance graphs and spanners are
invalidated by boundary events and rebuilt the next time they are read.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .clusters import Cluster, Clustering
from .ddg import DenseDistanceGraph, cluster_ddg, restrict_ddg
from .spanner import Spanner, build_spanner

PASSIVE, ACTIVE, RETIRED = 0, 1, 2


class IllegalTransition(ValueError):
    """A vertex was activated twice or deactivated while not active."""


class ActiveSet:
    """Per-vertex state with the at-most-once transitions."""

    def __init__(self, n: int):
        self.state = bytearray(n)
        self.members: set[int] = set()

    def activate(self, v: int) -> None:
        if self.state[v] != PASSIVE:
            raise IllegalTransition(f"vertex {v} cannot become active again")
        self.state[v] = ACTIVE
        self.members.add(v)

    def deactivate(self, v: int) -> None:
        if self.state[v] != ACTIVE:
            raise IllegalTransition(f"vertex {v} is not active")
        self.state[v] = RETIRED
        self.members.discard(v)

    def __contains__(self, v: int) -> bool:
        return self.state[v] == ACTIVE

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class Piece:
    """A connected vertex set inside one cluster with its exact weight."""

    vertices: list[int]
    weight: Fraction
    boundary: list[int]


@dataclass
class XState:
    xclusters: list[Piece]
    inner: list[Piece]


@dataclass
class Component:
    """One component of ``G - X`` assembled from pieces."""

    pieces: list[Piece]
    weight: Fraction
    size: int
    rep: int
    _vertices: set[int] | None = field(default=None, repr=False)

    def vertices(self) -> set[int]:
        if self._vertices is None:
            out: set[int] = set()
            for p in self.pieces:
                out.update(p.vertices)
            self._vertices = out
        return self._vertices


class DynamicDecomposition:
    """Active/passive bookkeeping over a nested clustering."""

    def __init__(self, cl: Clustering, epsilon: float = 1.0):
        if not cl.nested:
            raise ValueError("a nested clustering is required")
        self.cl = cl
        g = cl.g
        self.g = g
        self.epsilon = epsilon
        self.active = ActiveSet(g.n)
        self.adj: dict[int, dict[int, list[int]]] = {}
        self.boundary_of: list[list[int]] = [[] for _ in range(g.n)]
        self.interior_of: list[list[int]] = [[] for _ in range(g.n)]
        self.active_interior: dict[int, int] = {}
        for c in cl:
            adj: dict[int, list[int]] = {}
            for e in c.edges:
                a, b = g.eu[e], g.ev[e]
                adj.setdefault(a, []).append(b)
                adj.setdefault(b, []).append(a)
            self.adj[c.id] = adj
            self.active_interior[c.id] = 0
            for v in c.vertices:
                (self.boundary_of if v in c.boundary else self.interior_of)[v].append(c.id)
        self.isolated = [v for v in range(g.n) if not g.adj[v]]
        self._xstate: dict[int, XState] = {}
        self._ddg: dict[int, DenseDistanceGraph] = {}
        self._restricted: dict[int, tuple[DenseDistanceGraph, Spanner]] = {}
        self._cx: list[int] | None = None
        self.recomputations = 0
        self.spanner_builds = 0

    # ------------------------------------------------------------------
    # events

    def activate(self, v: int) -> None:
        self.active.activate(v)
        self._touch(v, +1)

    def deactivate(self, v: int) -> None:
        self.active.deactivate(v)
        self._touch(v, -1)

    def xcluster_maintain(self, event: str, v: int) -> None:
        if event == "activate":
            self.activate(v)
        elif event == "deactivate":
            self.deactivate(v)
        else:
            raise ValueError(f"unknown event {event!r}")

    def _touch(self, v: int, delta: int) -> None:
        for cid in self.boundary_of[v]:
            self._xstate.pop(cid, None)
            self._restricted.pop(cid, None)
        if self.interior_of[v]:
            for cid in self.interior_of[v]:
                self.active_interior[cid] += delta
            self._cx = None

    # ------------------------------------------------------------------
    # per-cluster state

    def _pieces(self, c: Cluster, blocked) -> XState:
        adj = self.adj[c.id]
        w = self.g.weight
        seen: set[int] = set()
        xcl: list[Piece] = []
        inner: list[Piece] = []
        for s in c.vertices:
            if s in seen or blocked(s):
                continue
            seen.add(s)
            comp = [s]
            i = 0
            while i < len(comp):
                for y in adj[comp[i]]:
                    if y not in seen and not blocked(y):
                        seen.add(y)
                        comp.append(y)
                i += 1
            wt = sum((Fraction(w[x]) for x in comp), Fraction(0))
            bnd = [x for x in comp if x in c.boundary]
            (xcl if bnd else inner).append(Piece(comp, wt, bnd))
        return XState(xcl, inner)

    def xstate(self, cid: int) -> XState:
        st = self._xstate.get(cid)
        if st is None:
            c = self.cl.clusters[cid]
            act = self.active
            st = self._pieces(c, lambda x: x in c.boundary and x in act)
            self._xstate[cid] = st
            self.recomputations += 1
        return st

    def _leaf_state(self, cid: int) -> XState:
        """Pieces of ``C - X`` for a leaf that still has an active interior vertex."""
        act = self.active
        return self._pieces(self.cl.clusters[cid], lambda x: x in act)

    def full_ddg(self, cid: int) -> DenseDistanceGraph:
        d = self._ddg.get(cid)
        if d is None:
            d = cluster_ddg(self.g, self.cl.clusters[cid])
            self._ddg[cid] = d
        return d

    def restricted(self, cid: int) -> tuple[DenseDistanceGraph, Spanner]:
        """``D_{dC - X}(C)`` and its ``(1/eps)``-spanner."""
        got = self._restricted.get(cid)
        if got is None:
            full = self.full_ddg(cid)
            act = self.active
            sub = restrict_ddg(full, [b for b in full.vertices if b not in act])
            sp = build_spanner(sub.edges(), self.epsilon, sub.vertices)
            self.spanner_builds += 1
            got = (sub, sp)
            self._restricted[cid] = got
        return got

    # ------------------------------------------------------------------
    # refinement and components

    def refine_cx(self) -> list[int]:
        if self._cx is not None:
            return self._cx
        out: list[int] = []
        stack = list(reversed(self.cl.top))
        clusters = self.cl.clusters
        while stack:
            cid = stack.pop()
            c = clusters[cid]
            if self.active_interior[cid] and c.children:
                stack.extend(reversed(c.children))
            else:
                out.append(cid)
        self._cx = out
        return out

    def cx_boundary(self) -> set[int]:
        out: set[int] = set()
        for cid in self.refine_cx():
            out |= self.cl.clusters[cid].boundary
        return out

    def component_weights(self) -> list[Component]:
        """Every component of ``G - X`` with its exact weight."""
        parent: dict[int, int] = {}

        def find(x: int) -> int:
            root = x
            while parent.setdefault(root, root) != root:
                root = parent[root]
            while parent[x] != root:
                parent[x], x = root, parent[x]
            return root

        w = self.g.weight
        out: list[Component] = []
        glued: list[Piece] = []
        for cid in self.refine_cx():
            st = self._leaf_state(cid) if self.active_interior[cid] else self.xstate(cid)
            for p in st.inner:
                out.append(Component([p], p.weight, len(p.vertices), min(p.vertices)))
            for p in st.xclusters:
                glued.append(p)
                r0 = find(p.boundary[0])
                for b in p.boundary[1:]:
                    rb = find(b)
                    if rb != r0:
                        parent[rb] = r0
        groups: dict[int, list[Piece]] = {}
        count: dict[int, int] = {}
        for p in glued:
            groups.setdefault(find(p.boundary[0]), []).append(p)
            for b in p.boundary:
                count[b] = count.get(b, 0) + 1
        over: dict[int, tuple[Fraction, int]] = {}
        for b, k in count.items():
            if k > 1:
                root = find(b)
                fw, fs = over.get(root, (Fraction(0), 0))
                over[root] = (fw + (k - 1) * Fraction(w[b]), fs + k - 1)
        for root, ps in groups.items():
            fw, fs = over.get(root, (Fraction(0), 0))
            wt = sum((p.weight for p in ps), Fraction(0)) - fw
            size = sum(len(p.vertices) for p in ps) - fs
            out.append(Component(ps, wt, size, min(p.boundary[0] for p in ps)))
        act = self.active
        for v in self.isolated:
            if v not in act:
                out.append(Component([Piece([v], Fraction(w[v]), [])], Fraction(w[v]), 1, v))
        return out

    # ------------------------------------------------------------------
    # distances in the spanner union

    def sx_adjacency(self) -> dict[int, list[tuple[float, int, int]]]:
        """Adjacency of ``S_X``: ``v -> [(weight, neighbour, cluster id)]``."""
        adj: dict[int, list[tuple[float, int, int]]] = {}
        for cid in self.refine_cx():
            _, sp = self.restricted(cid)
            for a, b, wt in sp.edges:
                adj.setdefault(a, []).append((wt, b, cid))
                adj.setdefault(b, []).append((wt, a, cid))
        return adj

    def sx_distances(self, source: int, adj: dict | None = None) -> dict[int, float]:
        adj = self.sx_adjacency() if adj is None else adj
        return dijkstra(adj, [(0.0, source)])[0]


def dijkstra(adj: dict[int, list[tuple[float, int, int]]],
             sources: Iterable[tuple[float, int]], limit: float = math.inf
             ) -> tuple[dict[int, float], dict[int, tuple[int, int]]]:
    """Distances and ``(predecessor, cluster id)`` links from weighted sources."""
    dist: dict[int, float] = {}
    link: dict[int, tuple[int, int]] = {}
    heap = []
    for d0, s in sources:
        if d0 < dist.get(s, math.inf):
            dist[s] = d0
            link[s] = (-1, -1)
            heap.append((d0, s))
    heapq.heapify(heap)
    done: set[int] = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        for wt, y, cid in adj.get(x, ()):
            nd = d + wt
            if nd <= limit and nd < dist.get(y, math.inf):
                dist[y] = nd
                link[y] = (x, cid)
                heapq.heappush(heap, (nd, y))
    return dist, link
