"""Mini-cluster separator: degree filter, spanner-fed oracles and tree expansion.

High-degree vertices go straight into the separator.  The rest of the graph
is covered by an ``ell``-clustering, and every cluster ``C`` is cut into mini
clusters: the regions grown from interior components of ``C`` (each region
holds the component plus the boundary vertices next to it) and the single
edges joining two boundary vertices.  Each mini cluster contributes a
``6/eps``-spanner of its dense distance graph to a multigraph ``S`` on which
``h - 1`` decremental oracles run.

A mini cluster is *inside* while all its vertices are outside ``M u A`` and
*evicted* once a tree touches it.  Every adopted tree first absorbs the
interior of each inside mini cluster it touches, then those mini clusters
are evicted, which deletes their spanner edges from every oracle.  Oracles
therefore only ever see deletions.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .clustering.clusters import (Budgets, Clustering, RegimeError, build_r_clustering,
                                  check_regime, lift_certificate)
from .clustering.ddg import DenseDistanceGraph, dense_distance_graph
from .clustering.spanner import build_spanner
from .graph import ProblemParams, WeightedGraph, sparsity_gate, split_high_degree
from .oracle import INF, DecOracle, OracleConfig
from .outcome import MinorCertificate, Outcome, Rejected, RunStats, Separator, TreeRecord
from .separator import GenericRun, InvariantViolation, TreeFinder, bfs_tree

INSIDE, EVICTED = "inside", "evicted"


@dataclass
class MiniCluster:
    id: int
    origin: int
    kind: str                     # "C1" grown region, "C2" boundary-boundary edge
    vertices: list[int]
    edges: list[int]
    interior: list[int]
    boundary: list[int]
    pairs: list[tuple[int, int]] = field(default_factory=list)
    state: str = INSIDE
    ddg: DenseDistanceGraph | None = field(default=None, repr=False)
    spanner_eids: list[int] = field(default_factory=list)

    @property
    def selected(self) -> bool:
        return bool(self.pairs)

    @property
    def pair(self) -> tuple[int, int] | None:
        return self.pairs[0] if self.pairs else None


def stretch_params(epsilon: float) -> tuple[float, int]:
    """Spanner stretch ``6/eps`` and the largest oracle ``k`` with ``2k-1 <= 6/eps``."""
    t = 6.0 / epsilon
    k = math.ceil((t + 1) / 2)
    while k > 1 and 2 * k - 1 > t + 1e-9:
        k -= 1
    if 2 * k - 1 < 3:
        raise ValueError("stretch 6/eps must allow an oracle with 2k-1 >= 3")
    return t, k


def _region_distances(adj: dict[int, list[int]], allowed: set[int], src: int) -> dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        x = queue.popleft()
        for y in adj.get(x, ()):
            if y in allowed and y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def build_mini_clusters(g: WeightedGraph, cl: Clustering) -> list[MiniCluster]:
    """Mini clusters of every cluster of ``cl`` (an edge partition of ``g``).

    Pairs of boundary vertices are associated, per origin cluster, with the
    region of smallest in-region distance; ties go to the region with the
    smaller minimum interior vertex id.  Regions that win no pair are kept
    (with no pair) so that the edge partition stays intact.
    """
    out: list[MiniCluster] = []
    for c in sorted(cl, key=lambda c: c.id):
        bset = c.boundary
        adj: dict[int, list[int]] = {}
        for e in c.edges:
            a, b = g.eu[e], g.ev[e]
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        seen: set[int] = set()
        regions: list[MiniCluster] = []
        for s in c.vertices:
            if s in bset or s in seen:
                continue
            seen.add(s)
            comp = [s]
            i = 0
            while i < len(comp):
                for y in adj[comp[i]]:
                    if y not in bset and y not in seen:
                        seen.add(y)
                        comp.append(y)
                i += 1
            iset = set(comp)
            bnd = sorted({y for x in comp for y in adj[x] if y in bset})
            edges = [e for e in c.edges if g.eu[e] in iset or g.ev[e] in iset]
            regions.append(MiniCluster(-1, c.id, "C1", sorted(iset | set(bnd)), edges,
                                       sorted(iset), bnd))
        # association of boundary pairs
        best: dict[tuple[int, int], tuple[int, int, int]] = {}
        for ri, reg in enumerate(regions):
            allowed = set(reg.vertices)
            radj: dict[int, list[int]] = {}
            for e in reg.edges:
                a, b = g.eu[e], g.ev[e]
                radj.setdefault(a, []).append(b)
                radj.setdefault(b, []).append(a)
            for b1 in reg.boundary:
                dist = _region_distances(radj, allowed, b1)
                for b2 in reg.boundary:
                    if b2 > b1 and b2 in dist:
                        key = (dist[b2], reg.interior[0], ri)
                        if (b1, b2) not in best or key < best[(b1, b2)]:
                            best[(b1, b2)] = key
        for pair in sorted(best):
            regions[best[pair][2]].pairs.append(pair)
        out.extend(regions)
        for e in c.edges:
            a, b = g.eu[e], g.ev[e]
            if a in bset and b in bset:
                out.append(MiniCluster(-1, c.id, "C2", sorted((a, b)), [e], [], sorted((a, b))))
    for i, mc in enumerate(out):
        mc.id = i
    return out


def mini_cluster_budgets(minis: list[MiniCluster], cl: Clustering, n: int, ell: int,
                         budgets: Budgets) -> tuple[bool, dict]:
    per: dict[int, int] = {}
    for mc in minis:
        per[mc.origin] = per.get(mc.origin, 0) + len(mc.boundary)
    worst = 0.0
    ok = True
    for cid, total in per.items():
        nb = len(cl.clusters[cid].boundary)
        limit = budgets.b_m * nb * math.log2(nb + 2)
        if total > limit:
            ok = False
        if limit > 0:
            worst = max(worst, total / limit)
        elif total > 0:
            ok = False
    overall = sum(per.values())
    overall_limit = budgets.b_all * (n / math.sqrt(ell)) * math.log2(n + 1) ** 2
    ok = ok and overall <= overall_limit
    return ok, {"mini_boundary_total": overall, "mini_boundary_limit": overall_limit,
                "mini_boundary_worst_ratio": worst}


class MiniClusterTreeFinder(TreeFinder):
    """Oracle tree search over the spanner multigraph ``S``."""

    def __init__(self, minis: list[MiniCluster], epsilon: float, budgets: Budgets,
                 seed: int = 0):
        self.minis = minis
        self.epsilon = epsilon
        self.budgets = budgets
        self.seed = seed
        self.evictions = 0
        self.absorbed_total = 0
        self.cap_breaches = 0
        self._pending: list[int] = []

    def bind(self, run: GenericRun) -> None:
        super().bind(run)
        g = run.g
        p = run.params
        self.t, self.k3 = stretch_params(self.epsilon)
        self.d3 = max(1, math.ceil(self.t * run.rho - 1e-9))
        self.theta = (2 * self.k3 - 1) * self.d3
        self.radius_bound = self.theta + 2 * p.ell
        n_all = run.g.n
        self.size_cap = self.budgets.c_e * p.ell * math.sqrt(n_all) * math.log2(n_all + 1)
        self.mc_of: list[list[int]] = [[] for _ in range(g.n)]
        self.home: list[int] = [-1] * g.n
        edges: list[tuple[int, int]] = []
        lengths: list[int] = []
        self.owner: list[tuple[int, int, int]] = []
        for mc in self.minis:
            for v in mc.vertices:
                self.mc_of[v].append(mc.id)
            for v in mc.interior:
                self.home[v] = mc.id
            mc.ddg = dense_distance_graph(((g.eu[e], g.ev[e]) for e in mc.edges),
                                          mc.boundary, mc.id)
            sp = build_spanner(mc.ddg.edges(), self.epsilon / 6.0, mc.ddg.vertices)
            mc.spanner_eids = []
            for a, b, w in sp.edges:
                mc.spanner_eids.append(len(edges))
                edges.append((a, b))
                lengths.append(int(round(w)))
                self.owner.append((mc.id, a, b))
        self.spanner_edges = len(edges)
        self.oracles = [DecOracle(g.n, edges, OracleConfig(self.k3, self.d3, self.seed + i),
                                  lengths) for i in range(p.h - 1)]
        self.radj: dict[int, dict[int, list[int]]] = {}

    # ------------------------------------------------------------------

    def _region_adj(self, mid: int) -> dict[int, list[int]]:
        adj = self.radj.get(mid)
        if adj is None:
            g = self.run.g
            adj = {}
            for e in self.minis[mid].edges:
                a, b = g.eu[e], g.ev[e]
                adj.setdefault(a, []).append(b)
                adj.setdefault(b, []).append(a)
            self.radj[mid] = adj
        return adj

    def _sources(self, u: int) -> list[tuple[int, int, list[int]]]:
        """``(offset, start, leg)`` triples: ``u`` itself or the boundary of its home."""
        mid = self.home[u]
        if mid < 0:
            return [(0, u, [u])]
        mc = self.minis[mid]
        bset = set(mc.boundary)
        adj = self._region_adj(mid)
        parent = {u: -1}
        dist = {u: 0}
        queue = deque([u])
        while queue:
            x = queue.popleft()
            if x in bset:
                continue
            for y in adj.get(x, ()):
                if y not in dist:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
        out = []
        for b in mc.boundary:
            if b in dist:
                leg = [b]
                while parent[leg[-1]] >= 0:
                    leg.append(parent[leg[-1]])
                out.append((dist[b], b, leg[::-1]))
        return out

    def _unpack(self, verts: list[int], eids: list[int]) -> list[int]:
        out = [verts[0]]
        for x, e in zip(verts, eids):
            mid, a, b = self.owner[e]
            seg = self.minis[mid].ddg.unpack(a, b) if x == a else self.minis[mid].ddg.unpack(b, a)
            if seg[0] != out[-1]:
                raise AssertionError("spanner edges do not chain")
            out.extend(seg[1:])
        return out

    def find_tree(self, u: int) -> TreeRecord | int:
        run = self.run
        proper = run.proper_slots()
        sources = self._sources(u)
        paths: list[list[int]] = []
        for i in proper[1:]:
            frontier = {y for x in run.slot_sets[i] for y in run.g.adj[x] if run.free_vertex(y)}
            o = self.oracles[i]
            best = None
            for off, b, leg in sources:
                est = o.query_nearest(b, frontier)
                if est.value < INF and (best is None or off + est.value < best[0]):
                    best = (off + est.value, est, leg)
            if best is None or best[0] > self.theta:
                return i
            _, est, leg = best
            verts, eids = o.path_steps(est)
            path = leg[:-1] + self._unpack(verts, eids)
            cut = []
            for x in path:
                cut.append(x)
                if run.incident_to_slot(x, i):
                    break
            else:
                raise AssertionError("oracle path never reached its target tree")
            paths.append(cut)
        nbrs: dict[int, list[int]] = {}
        for path in paths:
            for a, b in zip(path, path[1:]):
                nbrs.setdefault(a, []).append(b)
                nbrs.setdefault(b, []).append(a)
        parent = bfs_tree(u, nbrs)
        self._pending = self.expand_tree(parent)
        if len(parent) > self.size_cap:
            self.cap_breaches += 1
        return TreeRecord(-1, u, parent, self.radius_bound)

    def expand_tree(self, parent: dict[int, int]) -> list[int]:
        """Absorb the interior of every inside mini cluster the tree touches.

        Grows ``parent`` in place and returns the ids of the touched mini
        clusters, which must be evicted when the tree is adopted.
        """
        touched = sorted({m for v in parent for m in self.mc_of[v]
                          if self.minis[m].state == INSIDE})
        before = len(parent)
        for mid in touched:
            mc = self.minis[mid]
            inner = set(mc.interior)
            adj = self._region_adj(mid)
            queue = deque(v for v in mc.vertices if v in parent)
            while queue:
                x = queue.popleft()
                for y in adj.get(x, ()):
                    if y in inner and y not in parent:
                        parent[y] = x
                        queue.append(y)
        self.absorbed_total += len(parent) - before
        return touched

    def evict(self, mid: int) -> None:
        mc = self.minis[mid]
        if mc.state != INSIDE:
            raise InvariantViolation(f"mini cluster {mid} evicted twice")
        mc.state = EVICTED
        self.evictions += 1
        for e in mc.spanner_eids:
            for o in self.oracles:
                if o.alive[e]:
                    o.delete_edge_id(e)
                    self.run.stats.oracle_deletions += 1

    def on_adopt(self, slot: int, tree: TreeRecord) -> None:
        for mid in self._pending:
            self.evict(mid)
        self._pending = []
        if self.run.debug:
            self.check_membership()

    def check_membership(self) -> None:
        """Inside mini clusters avoid ``M u A``; evicted ones keep no free interior."""
        free = self.run.free_vertex
        for mc in self.minis:
            if mc.state == INSIDE:
                if not all(free(v) for v in mc.vertices):
                    raise InvariantViolation(f"inside mini cluster {mc.id} meets M or A")
            elif any(free(v) for v in mc.interior):
                raise InvariantViolation(f"evicted mini cluster {mc.id} has a free interior vertex")


def run_algorithm3(g: WeightedGraph, params: ProblemParams, *, seed: int = 0,
                   budgets: Budgets | None = None, debug: bool = False,
                   sparsity_check: bool = True) -> Outcome:
    """Separator of size ``O(n/ell) + O~(ell sqrt n)``, a certificate, or a rejection.

    High-degree vertices are always part of a returned separator.
    """
    budgets = budgets or Budgets()
    stats = RunStats(algo=3)
    if sparsity_check and not sparsity_gate(g, params, budgets.c_sp):
        return Rejected("dense", stats)
    n = g.n
    ell = params.ell
    delta = max(1, math.ceil(math.sqrt(n) / ell))
    high, low, orig = split_high_degree(g, delta)
    stats.extra.update({"delta": delta, "high_degree": len(high)})
    if low.n == 0:
        stats.extra["separator_size"] = len(high)
        return Separator(set(high), stats)
    check_regime(low.n, ell, budgets)
    cl = build_r_clustering(low, params, ell, budgets=budgets, seed=seed)
    if isinstance(cl, MinorCertificate):
        cert = lift_certificate(cl, orig)
        cert.stats.algo = 3
        cert.stats.extra["stage"] = "clustering"
        return cert
    if isinstance(cl, Rejected):
        return Rejected(cl.reason, stats)
    minis = build_mini_clusters(low, cl)
    ok, mdiag = mini_cluster_budgets(minis, cl, low.n, ell, budgets)
    stats.extra.update(mdiag)
    stats.extra["mini_c1"] = sum(mc.kind == "C1" for mc in minis)
    stats.extra["mini_c1_selected"] = sum(mc.kind == "C1" and mc.selected for mc in minis)
    stats.extra["mini_c2"] = sum(mc.kind == "C2" for mc in minis)
    if not ok:
        return Rejected("mini-cluster budget", stats)
    finder = MiniClusterTreeFinder(minis, params.epsilon, budgets, seed)
    run = GenericRun(low, params, finder, debug=debug, stats=stats)
    out = run.run()
    stats.extra.update({
        "rho": run.rho, "k3": finder.k3, "d3": finder.d3, "theta": finder.theta,
        "spanner_edges": finder.spanner_edges, "evictions": finder.evictions,
        "absorbed_vertices": finder.absorbed_total, "tree_cap": finder.size_cap,
        "tree_cap_breaches": finder.cap_breaches, "clusters": len(cl.clusters),
    })
    if isinstance(out, MinorCertificate):
        return lift_certificate(out, orig)
    if isinstance(out, Separator):
        sep = {orig[v] for v in out.vertices} | set(high)
        stats.extra["separator_size"] = len(sep)
        stats.extra["low_separator_size"] = len(out.vertices)
        return Separator(sep, stats)
    return out


__all__ = ["MiniCluster", "MiniClusterTreeFinder", "RegimeError", "build_mini_clusters",
           "mini_cluster_budgets", "run_algorithm3", "stretch_params"]
