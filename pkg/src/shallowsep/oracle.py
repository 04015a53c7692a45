"""Decremental approximate distance oracle for bounded distances.

The structure follows the Thorup-Zwick sampling scheme: vertex levels
``A_0 = V ⊇ A_1 ⊇ ... ⊇ A_{k-1}`` are sampled once, the distance from every
vertex to each level ``A_i`` is kept in a truncated shortest-path tree that is
repaired after each deletion, and the cluster ``C(w)`` of a centre ``w`` (the
vertices strictly closer to ``w`` than to the next level) is grown on demand
by a pruned Dijkstra and cached until a deletion or a level change can affect
it.

Guarantees, for the current graph after any deletion sequence:

* ``query(u, v).value >= d(u, v)``, and the value is the length of a real walk;
* if ``d(u, v) <= d`` then ``query(u, v).value <= (2k - 1) * d(u, v)``;
* estimates that cannot be certified within the horizon are ``math.inf``.

With ``k = 1`` the hierarchy has a single level and every answer is exact.
"""

from __future__ import annotations

import heapq
import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .graph import WeightedGraph

INF = math.inf


class StaleWitnessError(RuntimeError):
    """A path was requested for an estimate taken before the latest deletion."""


@dataclass(frozen=True)
class OracleConfig:
    k: int
    d: int
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("oracle needs k >= 1")
        if self.d < 1:
            raise ValueError("oracle needs d >= 1")

    def stretch(self) -> int:
        return 2 * self.k - 1


@dataclass(frozen=True)
class DistEstimate:
    u: int
    v: int
    value: float
    # (version, centre, level, swapped); None for u == v or value == inf
    witness: tuple | None = None

    def within(self, bound: float) -> bool:
        return self.value <= bound


class _LevelTree:
    """Truncated multi-source shortest-path tree towards one sampled level."""

    __slots__ = ("dist", "pedge", "root")

    def __init__(self, n: int):
        self.dist = [INF] * n
        self.pedge = [-1] * n
        self.root = [-1] * n


class _Cluster:
    """Progressively grown cluster ``C(w)`` of one centre."""

    __slots__ = ("center", "level", "dist", "pedge", "rejected", "queue",
                 "frontier", "done", "indexed")

    def __init__(self, center: int, level: int, unit: bool, indexed: bool):
        self.center = center
        self.level = level
        self.dist: dict[int, float] = {}
        self.pedge: dict[int, int] = {center: -1}
        self.rejected: set[int] = set()
        self.frontier: dict[int, float] = {center: 0}
        self.queue = deque([(0, center)]) if unit else [(0, center)]
        self.done = False
        self.indexed = indexed


class DecOracle:
    """Decremental ``(2k-1)``-approximate oracle for distances up to ``d``."""

    def __init__(self, n: int, edges: Sequence[tuple[int, int]],
                 cfg: OracleConfig, lengths: Sequence[int] | None = None):
        if n < 1:
            raise ValueError("oracle needs at least one vertex")
        self.n = n
        self.cfg = cfg
        self.k = cfg.k
        self.d = cfg.d
        self.budget = cfg.k * cfg.d
        adj: list[list[int]] = [[] for _ in range(n)]
        inc: list[list[int]] = [[] for _ in range(n)]
        self.eu: list[int] = []
        self.ev: list[int] = []
        for eid, (a, b) in enumerate(edges):
            if a == b:
                raise ValueError(f"self-loop at {a}")
            self.eu.append(a)
            self.ev.append(b)
            adj[a].append(b)
            inc[a].append(eid)
            adj[b].append(a)
            inc[b].append(eid)
        self.adj = adj
        self.inc = inc
        m = len(self.eu)
        if lengths is None:
            self.length: list[int] | None = None
        else:
            self.length = [int(x) for x in lengths]
            if len(self.length) != m or any(x < 1 for x in self.length):
                raise ValueError("edge lengths must be integers >= 1, one per edge")
        self.alive = bytearray(b"\x01") * m
        self.version = 0
        self.deletions = 0

        rng = random.Random(cfg.seed)
        prob = n ** (-1.0 / cfg.k)
        self.top = [0] * n
        members = list(range(n))
        self.levels: list[list[int]] = [members]
        for i in range(1, cfg.k):
            members = [v for v in members if rng.random() < prob]
            for v in members:
                self.top[v] = i
            self.levels.append(members)
        self.trees: list[_LevelTree | None] = [None]
        for i in range(1, cfg.k):
            tree = _LevelTree(n)
            self._build_level(tree, self.levels[i])
            self.trees.append(tree)

        self._clusters: dict[int, _Cluster] = {}
        self._unindexed: set[int] = set()
        self._touch: dict[int, set[int]] = {}
        self._cached_size = 0
        self._cache_budget = 2 * n + 1024

    @classmethod
    def build(cls, g: WeightedGraph, cfg: OracleConfig) -> DecOracle:
        """Oracle over all edges of ``g`` with unit lengths; edge ids match ``g``."""
        return cls(g.n, list(g.edges()), cfg)

    # ------------------------------------------------------------------
    # helpers

    def _len(self, eid: int) -> int:
        return 1 if self.length is None else self.length[eid]

    def _other(self, eid: int, v: int) -> int:
        return self.eu[eid] + self.ev[eid] - v

    def edge_id(self, u: int, v: int) -> int:
        for x, e in zip(self.adj[u], self.inc[u]):
            if x == v and self.alive[e]:
                return e
        return -1

    def has_edge(self, u: int, v: int) -> bool:
        return self.edge_id(u, v) >= 0

    def _build_level(self, tree: _LevelTree, sources: Iterable[int]) -> None:
        dist, pedge, root = tree.dist, tree.pedge, tree.root
        heap = []
        for s in sources:
            dist[s] = 0
            root[s] = s
            heap.append((0, s))
        heapq.heapify(heap)
        budget = self.budget
        adj, inc, alive = self.adj, self.inc, self.alive
        while heap:
            dv, v = heapq.heappop(heap)
            if dv > dist[v]:
                continue
            for x, e in zip(adj[v], inc[v]):
                if not alive[e]:
                    continue
                nd = dv + self._len(e)
                if nd <= budget and nd < dist[x]:
                    dist[x] = nd
                    pedge[x] = e
                    root[x] = root[v]
                    heapq.heappush(heap, (nd, x))

    def _repair_level(self, tree: _LevelTree, top: int) -> list[int]:
        """Recompute the subtree hanging below ``top``; return vertices whose
        distance changed."""
        dist, pedge, root = tree.dist, tree.pedge, tree.root
        adj, inc, alive = self.adj, self.inc, self.alive
        sub = [top]
        inside = {top}
        i = 0
        while i < len(sub):
            y = sub[i]
            for x, e in zip(adj[y], inc[y]):
                if pedge[x] == e and x not in inside and alive[e]:
                    inside.add(x)
                    sub.append(x)
            i += 1
        old = {x: dist[x] for x in sub}
        for x in sub:
            dist[x] = INF
        budget = self.budget
        heap = []
        for x in sub:
            best, be = INF, -1
            for y, e in zip(adj[x], inc[x]):
                if alive[e] and y not in inside:
                    nd = dist[y] + self._len(e)
                    if nd < best:
                        best, be = nd, e
            if best <= budget:
                dist[x] = best
                pedge[x] = be
                heap.append((best, x))
            else:
                pedge[x] = -1
                root[x] = -1
        heapq.heapify(heap)
        while heap:
            dv, v = heapq.heappop(heap)
            if dv > dist[v]:
                continue
            root[v] = root[self._other(pedge[v], v)]
            for x, e in zip(adj[v], inc[v]):
                if alive[e] and x in inside:
                    nd = dv + self._len(e)
                    if nd <= budget and nd < dist[x]:
                        dist[x] = nd
                        pedge[x] = e
                        heapq.heappush(heap, (nd, x))
        for x in sub:
            if dist[x] == INF:
                pedge[x] = -1
                root[x] = -1
        return [x for x in sub if dist[x] != old[x]]

    # ------------------------------------------------------------------
    # clusters

    def _next_level_dist(self, level: int, v: int) -> float:
        if level + 1 >= self.k:
            return INF
        return self.trees[level + 1].dist[v]

    def _cluster(self, w: int) -> _Cluster:
        c = self._clusters.get(w)
        if c is None:
            level = self.top[w]
            c = _Cluster(w, level, self.length is None, indexed=level < self.k - 1)
            self._clusters[w] = c
            if c.indexed:
                self._touch.setdefault(w, set()).add(w)
            else:
                self._unindexed.add(w)
        return c

    def _register(self, c: _Cluster, v: int) -> None:
        self._cached_size += 1
        if c.indexed:
            s = self._touch.get(v)
            if s is None:
                self._touch[v] = {c.center}
            else:
                s.add(c.center)

    def _grow(self, c: _Cluster, target: int | None, targets: set[int] | None = None
              ) -> int | None:
        """Grow ``c`` until ``target`` is decided, any of ``targets`` joins, or
        the cluster is complete.  Returns the first target that joined."""
        if c.done:
            return None
        unit = self.length is None
        queue = c.queue
        dist, pedge, frontier = c.dist, c.pedge, c.frontier
        adj, inc, alive = self.adj, self.inc, self.alive
        budget = self.budget
        level = c.level
        limit = INF
        if target is not None:
            limit = min(budget, self._next_level_dist(level, target) - 1e-9)
        while queue:
            dv, v = queue[0]
            if dv > limit:
                return None
            if unit:
                queue.popleft()
            else:
                heapq.heappop(queue)
            if v in dist or v in c.rejected or frontier.get(v) != dv:
                continue
            del frontier[v]
            if not dv < self._next_level_dist(level, v):
                c.rejected.add(v)
                self._register(c, v)
                continue
            dist[v] = dv
            self._register(c, v)
            for x, e in zip(adj[v], inc[v]):
                if not alive[e] or x in dist:
                    continue
                nd = dv + (1 if unit else self.length[e])
                if nd <= budget and nd < frontier.get(x, INF):
                    frontier[x] = nd
                    pedge[x] = e
                    if unit:
                        queue.append((nd, x))
                    else:
                        heapq.heappush(queue, (nd, x))
            if v == target:
                return v
            if targets is not None and v in targets:
                return v
        c.done = True
        c.frontier = {}
        return None

    def _cluster_dist(self, w: int, v: int) -> float:
        c = self._cluster(w)
        d = c.dist.get(v)
        if d is None and not c.done and v not in c.rejected:
            self._grow(c, v)
            d = c.dist.get(v)
        self._trim_cache(w)
        return INF if d is None else d

    def _drop_cluster(self, w: int) -> None:
        c = self._clusters.pop(w, None)
        if c is None:
            return
        self._cached_size -= len(c.dist) + len(c.rejected)
        self._unindexed.discard(w)
        if c.indexed:
            for v in list(c.dist) + list(c.rejected) + [w]:
                s = self._touch.get(v)
                if s is not None:
                    s.discard(w)
                    if not s:
                        del self._touch[v]

    def _trim_cache(self, keep: int) -> None:
        if self._cached_size <= self._cache_budget:
            return
        for w in list(self._clusters):
            if self._cached_size <= self._cache_budget:
                break
            if w != keep:
                self._drop_cluster(w)

    # ------------------------------------------------------------------
    # deletions

    def delete_edge(self, u: int, v: int) -> None:
        """Delete the (a) live edge between ``u`` and ``v``."""
        eid = self.edge_id(u, v)
        if eid < 0:
            raise KeyError(f"edge ({u}, {v}) is not present")
        self.delete_edge_id(eid)

    def delete_edge_id(self, eid: int) -> None:
        if not self.alive[eid]:
            raise KeyError(f"edge id {eid} already deleted")
        self.alive[eid] = 0
        self.version += 1
        self.deletions += 1
        x, y = self.eu[eid], self.ev[eid]
        stale: set[int] = set()
        for i in range(1, self.k):
            tree = self.trees[i]
            if tree.pedge[y] == eid:
                changed = self._repair_level(tree, y)
            elif tree.pedge[x] == eid:
                changed = self._repair_level(tree, x)
            else:
                continue
            # level-(i-1) clusters that rejected a changed vertex may now grow
            for z in changed:
                for w in self._touch.get(z, ()):
                    if self._clusters[w].level == i - 1:
                        stale.add(w)
        for z in (x, y):
            for w in self._touch.get(z, ()):
                c = self._clusters[w]
                if x in c.dist or y in c.dist:
                    stale.add(w)
        for w in self._unindexed:
            c = self._clusters[w]
            if x in c.dist or y in c.dist:
                stale.add(w)
        for w in stale:
            self._drop_cluster(w)

    # ------------------------------------------------------------------
    # queries

    def query(self, u: int, v: int) -> DistEstimate:
        if u == v:
            return DistEstimate(u, v, 0, (self.version, u, 0, False))
        a, b = u, v
        w = u
        da = 0
        for i in range(self.k):
            if i > 0:
                a, b = b, a
                tree = self.trees[i]
                da = tree.dist[a]
                if da == INF:
                    return DistEstimate(u, v, INF)
                w = tree.root[a]
            db = self._cluster_dist(w, b)
            if db < INF:
                return DistEstimate(u, v, da + db, (self.version, w, i, a != u))
        return DistEstimate(u, v, INF)

    def query_nearest(self, u: int, targets: Iterable[int]) -> DistEstimate:
        """Smallest estimate from ``u`` over ``targets`` (ties: lowest id)."""
        tset = set(targets)
        if not tset:
            return DistEstimate(u, -1, INF)
        if u in tset:
            return self.query(u, u)
        if self.k == 1:
            c = self._cluster(u)
            if not any(v in c.dist for v in tset):
                self._grow(c, None, tset)
            hits = [(c.dist[v], v) for v in tset if v in c.dist]
            self._trim_cache(u)
            if not hits:
                return DistEstimate(u, -1, INF)
            dv, v = min(hits)
            return DistEstimate(u, v, dv, (self.version, u, 0, False))
        best = DistEstimate(u, -1, INF)
        for v in sorted(tset):
            est = self.query(u, v)
            if est.value < best.value:
                best = est
        return best

    def path_steps(self, est: DistEstimate) -> tuple[list[int], list[int]]:
        """Walk ``u -> v`` behind ``est`` as (vertices, edge ids)."""
        if est.u == est.v:
            return [est.u], []
        if est.witness is None:
            raise ValueError("no path behind an infinite estimate")
        version, w, level, swapped = est.witness
        if version != self.version:
            raise StaleWitnessError("a deletion happened after the query")
        a, b = (est.v, est.u) if swapped else (est.u, est.v)
        verts = [a]
        eids: list[int] = []
        if level > 0:
            pedge = self.trees[level].pedge
            x = a
            while x != w:
                e = pedge[x]
                x = self._other(e, x)
                verts.append(x)
                eids.append(e)
        c = self._clusters.get(w)
        if c is None or b not in c.dist:
            self._cluster_dist(w, b)
            c = self._clusters[w]
        tail_v = [b]
        tail_e: list[int] = []
        x = b
        while x != w:
            e = c.pedge[x]
            x = self._other(e, x)
            tail_v.append(x)
            tail_e.append(e)
        tail_v.reverse()
        tail_e.reverse()
        verts.extend(tail_v[1:])
        eids.extend(tail_e)
        if swapped:
            verts.reverse()
            eids.reverse()
        return verts, eids

    def retrieve_path(self, est: DistEstimate, from_end: str = "u") -> Iterator[int]:
        """Vertices of the walk behind ``est``, starting at ``u`` or at ``v``."""
        if from_end not in ("u", "v"):
            raise ValueError("from_end must be 'u' or 'v'")
        verts, _ = self.path_steps(est)
        if from_end == "v":
            verts.reverse()
        return iter(verts)

    def walk_length(self, eids: Iterable[int]) -> int:
        return sum(self._len(e) for e in eids)

    def diagnostics(self) -> dict:
        return {
            "n": self.n,
            "m": len(self.eu),
            "k": self.k,
            "d": self.d,
            "level_sizes": [len(a) for a in self.levels],
            "cached_clusters": len(self._clusters),
            "cached_vertices": self._cached_size,
            "deletions": self.deletions,
        }
