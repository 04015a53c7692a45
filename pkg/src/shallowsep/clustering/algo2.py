"""Clustering-based separator: the generic loop driven by spanner distances.

The active set is ``X = M u B``.  Components of ``G[V']`` come from the
X-clusters of the refined clustering, and tree search runs Dijkstra over the
union ``S_X`` of the per-cluster spanners plus exact legs inside single
clusters (from the root to the boundary and from the boundary to vertices
next to each target tree).  With stretch ``t = 1/eps`` a tree is accepted
when every target is within ``t * rho``; otherwise the exact distance to the
failing target exceeds ``rho`` and the cut runs as usual.
"""

from __future__ import annotations

import math
from collections import deque
from fractions import Fraction

from ..graph import ProblemParams, WeightedGraph
from ..outcome import MinorCertificate, Outcome, Rejected, RunStats, TreeRecord
from ..separator import GenericRun, InvariantViolation, TreeFinder, bfs_tree
from .clusters import Budgets, Clustering, RegimeError, build_nested, check_regime
from .dynamic import DynamicDecomposition, dijkstra
from .spanner import stretch_for


def check_algo2_regime(n: int, ell: int, budgets: Budgets) -> None:
    if ell * ell > n:
        raise RegimeError(f"ell={ell} exceeds sqrt(n)={math.sqrt(n):.2f}")
    check_regime(n, ell, budgets)


class ClusterTreeFinder(TreeFinder):
    """Tree search over the spanner union of the refined clustering."""

    def __init__(self, dd: DynamicDecomposition, epsilon: float, budgets: Budgets):
        self.dd = dd
        self.t = stretch_for(epsilon)
        self.budgets = budgets
        self.max_active = 0
        self.sx_edges_max = 0
        self.searches = 0

    def bind(self, run: GenericRun) -> None:
        super().bind(run)
        self.theta = math.floor(self.t * run.rho + 1e-9)
        self.radius_bound = self.theta
        n = run.g.n
        ell = run.params.ell
        self.active_bound = self.budgets.c_x * (ell * math.log(max(n, 2)) + n / ell)

    # ------------------------------------------------------------------
    # dynamic scenario hooks

    def _note_active(self) -> None:
        k = len(self.dd.active)
        self.max_active = max(self.max_active, k)
        if self.run.debug and k > self.active_bound:
            raise InvariantViolation(f"|X|={k} exceeds {self.active_bound:.1f}")

    def on_adopt(self, slot: int, tree: TreeRecord) -> None:
        for v in sorted(self.run.slot_sets[slot]):
            self.dd.activate(v)
        self._note_active()

    def on_prune(self, slot: int, tree: TreeRecord) -> None:
        for v in sorted(self.run.slot_sets[slot]):
            self.dd.deactivate(v)

    def on_cut(self, boundary: list[int], removed: list[int]) -> None:
        for v in boundary:
            if v not in self.dd.active:
                self.dd.activate(v)
        self._note_active()

    def heavy_component(self):
        run = self.run
        limit = Fraction(run.total) * 2
        for c in self.dd.component_weights():
            if run.in_vp[c.rep] and c.weight * 3 > limit:
                if c.size == len(run.vp):
                    return run.vp, float(c.weight)
                return c.vertices(), float(c.weight)
        return None

    # ------------------------------------------------------------------
    # tree search

    def _local_bfs(self, cid: int, sources: list[int]) -> tuple[dict[int, int], dict[int, int]]:
        """BFS inside cluster ``cid`` that stops at its boundary and skips ``X``."""
        c = self.dd.cl.clusters[cid]
        adj = self.dd.adj[cid]
        act = self.dd.active
        dist = {s: 0 for s in sources}
        parent = {s: -1 for s in sources}
        queue = deque(sources)
        while queue:
            x = queue.popleft()
            if x in c.boundary:
                continue
            for y in adj.get(x, ()):
                if y not in dist and y not in act:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
        return dist, parent

    @staticmethod
    def _trace(parent: dict[int, int], x: int) -> list[int]:
        out = [x]
        while parent[x] >= 0:
            x = parent[x]
            out.append(x)
        return out

    def find_tree(self, u: int) -> TreeRecord | int:
        run = self.run
        dd = self.dd
        proper = run.proper_slots()
        targets = proper[1:]
        if not targets:
            return TreeRecord(-1, u, {u: -1}, self.radius_bound)
        self.searches += 1
        cx = dd.refine_cx()
        cxset = set(cx)
        clusters = dd.cl.clusters
        act = dd.active
        in_vp = run.in_vp
        adj = dd.sx_adjacency()
        self.sx_edges_max = max(self.sx_edges_max, sum(len(v) for v in adj.values()) // 2)
        legs: list[list[int]] = []

        def add_leg(x: int, y: int, wt: float, path: list[int]) -> None:
            legs.append(path)
            adj.setdefault(x, []).append((wt, y, -2 - (len(legs) - 1)))

        def home(v: int) -> int:
            return next(c for c in dd.interior_of[v] if c in cxset)

        def is_cx_boundary(v: int) -> bool:
            return any(c in cxset for c in dd.boundary_of[v])

        # root leg when u is interior to one cluster of the refinement
        if not is_cx_boundary(u):
            cu = home(u)
            dist, parent = self._local_bfs(cu, [u])
            for b in clusters[cu].boundary:
                if b in dist and b != u and b not in act:
                    add_leg(u, b, dist[b], self._trace(parent, b)[::-1])
        # frontier of every target tree, mapped to sink nodes
        sink = {i: -2 - i for i in targets}
        for i in targets:
            frontier = sorted({y for x in run.slot_sets[i] for y in run.g.adj[x] if in_vp[y]})
            by_cluster: dict[int, list[int]] = {}
            for f in frontier:
                if is_cx_boundary(f):
                    add_leg(f, sink[i], 1, [f])
                else:
                    by_cluster.setdefault(home(f), []).append(f)
            for cid, fs in by_cluster.items():
                dist, parent = self._local_bfs(cid, fs)
                for b in sorted(clusters[cid].boundary):
                    if b in dist and b not in act:
                        add_leg(b, sink[i], dist[b] + 1, self._trace(parent, b))
                if u in dist and not is_cx_boundary(u):
                    add_leg(u, sink[i], dist[u] + 1, self._trace(parent, u))
        dist, link = dijkstra(adj, [(0.0, u)], self.theta + 1)
        for i in targets:
            if dist.get(sink[i], math.inf) > self.theta + 1:
                return i
        paths = []
        for i in targets:
            path = self._unpack(link, sink[i], legs)
            cut = []
            for x in path:
                cut.append(x)
                if run.incident_to_slot(x, i):
                    break
            paths.append(cut)
        nbrs: dict[int, list[int]] = {}
        for path in paths:
            for a, b in zip(path, path[1:]):
                nbrs.setdefault(a, []).append(b)
                nbrs.setdefault(b, []).append(a)
        return TreeRecord(-1, u, bfs_tree(u, nbrs), self.radius_bound)

    def _unpack(self, link: dict[int, tuple[int, int]], node: int,
                legs: list[list[int]]) -> list[int]:
        """Graph vertices along the Dijkstra path from the root to ``node``."""
        hops = []
        while link[node][0] != -1:
            prev, tag = link[node]
            hops.append((prev, node, tag))
            node = prev
        out: list[int] = [node]
        for prev, nxt, tag in reversed(hops):
            if tag >= 0:
                seg = self.dd.full_ddg(tag).unpack(prev, nxt)
            else:
                seg = legs[-2 - tag]
            if seg[0] != out[-1]:
                raise AssertionError("unpacked segments do not chain")
            out.extend(seg[1:])
        return out


def run_algorithm2(g: WeightedGraph, params: ProblemParams, *, seed: int = 0,
                   budgets: Budgets | None = None, debug: bool = False,
                   clustering: Clustering | None = None) -> Outcome:
    """Separator of size ``O(ell log n + n/ell)`` for constant ``h``, or a minor report.

    Raises :class:`RegimeError` unless ``c_min ln n < ell <= sqrt(n)``.
    """
    budgets = budgets or Budgets()
    check_algo2_regime(g.n, params.ell, budgets)
    stats = RunStats(algo=2)
    cl = clustering
    if cl is None:
        cl = build_nested(g, params, params.ell, budgets=budgets, seed=seed)
        if isinstance(cl, MinorCertificate):
            cl.stats.algo = 2
            cl.stats.extra["stage"] = "clustering"
            return cl
        if isinstance(cl, Rejected):
            return Rejected(cl.reason, stats)
    dd = DynamicDecomposition(cl, params.epsilon)
    finder = ClusterTreeFinder(dd, params.epsilon, budgets)
    run = GenericRun(g, params, finder, debug=debug, stats=stats)
    out = run.run()
    stats.extra.update({
        "rho": run.rho, "theta": finder.theta, "clusters": len(cl.clusters),
        "max_active": finder.max_active, "active_bound": finder.active_bound,
        "xcluster_recomputations": dd.recomputations, "spanner_builds": dd.spanner_builds,
        "sx_edges_max": finder.sx_edges_max, "tree_searches": finder.searches,
    })
    return out
