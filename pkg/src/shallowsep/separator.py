"""The generic separator-or-minor loop and its oracle-driven instantiation.

``GenericRun`` owns the vertex sets ``V'``, ``M``, ``V_r``, ``B`` and ``A``
together with ``h - 1`` tree slots and executes the outer loop.  A tree
finder plugged into it decides, per iteration, whether a new tree rooted at
``u`` exists (returned as a :class:`TreeRecord`) or which slot is far away
(returned as the slot index).  Everything else, including pruning, adoption,
the interleaved two-sided BFS cut and outcome assembly, lives here.

Slots are numbered ``0 .. h-2``.
"""

from __future__ import annotations

import math
import time
from collections import deque
from fractions import Fraction
from typing import Iterator

from .graph import ProblemParams, WeightedGraph, bfs_distances, sparsity_gate
from .oracle import DecOracle, OracleConfig
from .outcome import (MinorCertificate, Outcome, Rejected, RunStats, Separator,
                      TreeRecord)


class InvariantViolation(AssertionError):
    """A debug-mode invariant of the separator loop failed."""


def heavier_than_two_thirds(wx: float, total: float) -> bool:
    """``wx > (2/3) total`` evaluated exactly on the float values."""
    return Fraction(wx) * 3 > Fraction(total) * 2


class TreeFinder:
    """Hooks used by :class:`GenericRun`.  Subclasses implement ``find_tree``."""

    radius_bound: float = 0.0

    def bind(self, run: GenericRun) -> None:
        self.run = run

    def find_tree(self, u: int) -> TreeRecord | int:
        raise NotImplementedError

    def distant_vertex(self, u: int, slot: int) -> int:
        return self.run.lowest_vp_neighbour(slot)

    def on_adopt(self, slot: int, tree: TreeRecord) -> None:
        pass

    def on_prune(self, slot: int, tree: TreeRecord) -> None:
        pass

    def on_cut(self, boundary: list[int], removed: list[int]) -> None:
        pass

    def heavy_component(self) -> tuple[set[int], float] | None | bool:
        """Return ``False`` to let the engine flood-fill ``G[V']`` itself."""
        return False


class GenericRun:
    """One execution of the generic loop on ``g``."""

    def __init__(self, g: WeightedGraph, params: ProblemParams, finder: TreeFinder,
                 *, debug: bool = False, single_search: bool = False,
                 stats: RunStats | None = None):
        if g.n < 1:
            raise ValueError("graph must have at least one vertex")
        self.g = g
        self.params = params
        self.finder = finder
        self.debug = debug
        self.single_search = single_search
        self.stats = stats or RunStats()
        n = g.n
        self.rho = params.rho(n)
        self.total = g.total_weight()
        self.vp: set[int] = set(range(n))
        self.in_vp = bytearray(b"\x01") * n
        self.in_m = bytearray(n)
        self.in_a = bytearray(n)
        self.in_b = bytearray(n)
        self.in_r = bytearray(n)
        self.slots: list[TreeRecord | None] = [None] * (params.h - 1)
        self.slot_sets: list[set[int]] = [set() for _ in self.slots]
        self.b_list: list[int] = []
        self.cut_boundary_total = 0
        self._prev = None
        finder.bind(self)

    # ------------------------------------------------------------------
    # small helpers shared with tree finders

    def proper_slots(self) -> list[int]:
        return [i for i, t in enumerate(self.slots) if t is not None]

    def free_vertex(self, v: int) -> bool:
        """``v`` lies in ``V \\ (M u A)``."""
        return not self.in_m[v] and not self.in_a[v]

    def incident_to_slot(self, x: int, slot: int) -> bool:
        tv = self.slot_sets[slot]
        return any(y in tv for y in self.g.adj[x])

    def lowest_vp_neighbour(self, slot: int) -> int:
        in_vp = self.in_vp
        best = -1
        for x in self.slot_sets[slot]:
            for y in self.g.adj[x]:
                if in_vp[y] and (best < 0 or y < best):
                    best = y
        if best < 0:
            raise InvariantViolation(f"slot {slot} has no neighbour in V' (should have been pruned)")
        return best

    def _remove_from_vp(self, vs) -> None:
        in_vp = self.in_vp
        vp = self.vp
        for v in vs:
            if in_vp[v]:
                in_vp[v] = 0
                vp.discard(v)

    # ------------------------------------------------------------------
    # loop steps

    def _heavy_component(self) -> tuple[set[int], float] | None:
        hook = self.finder.heavy_component()
        if hook is not False:
            return hook
        g = self.g
        in_vp = self.in_vp
        seen = bytearray(g.n)
        adj = g.adj
        w = g.weight
        remaining = math.fsum(w[v] for v in self.vp)
        for s in sorted(self.vp):
            if seen[s]:
                continue
            if not heavier_than_two_thirds(remaining, self.total):
                return None
            seen[s] = 1
            comp = [s]
            i = 0
            while i < len(comp):
                for x in adj[comp[i]]:
                    if in_vp[x] and not seen[x]:
                        seen[x] = 1
                        comp.append(x)
                i += 1
            wx = math.fsum(w[v] for v in comp)
            if heavier_than_two_thirds(wx, self.total):
                return set(comp), wx
            remaining -= wx
        return None

    def restrict(self, x: set[int]) -> None:
        """Keep only ``x`` in ``V'``; other components go to ``V_r``."""
        if len(x) == len(self.vp):
            return
        rest = [v for v in self.vp if v not in x]
        for v in rest:
            self.in_vp[v] = 0
            self.in_r[v] = 1
        self.vp = x if isinstance(x, set) else set(x)
        self.finder.on_cut([], rest)

    def prune_trees(self) -> list[int]:
        """Empty every slot whose tree has no edge into ``V'``."""
        pruned = []
        adj = self.g.adj
        in_vp = self.in_vp
        for i, t in enumerate(self.slots):
            if t is None:
                continue
            if any(in_vp[y] for x in self.slot_sets[i] for y in adj[x]):
                continue
            for v in self.slot_sets[i]:
                self.in_m[v] = 0
                self.in_r[v] = 1
                self.in_a[v] = 1
            self.slots[i] = None
            self.finder.on_prune(i, t)
            self.slot_sets[i] = set()
            self.stats.trees_pruned += 1
            pruned.append(i)
        return pruned

    def choose_root(self) -> int:
        proper = self.proper_slots()
        if not proper:
            return min(self.vp)
        return self.lowest_vp_neighbour(proper[0])

    def adopt_tree(self, t: TreeRecord) -> MinorCertificate | None:
        """Take a free slot for ``t``, or return the certificate when every slot is taken."""
        free = next((i for i, s in enumerate(self.slots) if s is None), None)
        if free is None:
            return self._certificate(t)
        t.slot = free
        tv = t.vertices
        if self.debug:
            bad = [v for v in tv if not self.free_vertex(v)]
            if bad:
                raise InvariantViolation(f"tree uses vertices of M or A: {bad[:5]}")
        self.slots[free] = t
        self.slot_sets[free] = tv
        for v in tv:
            self.in_m[v] = 1
        self._remove_from_vp(tv)
        self.finder.on_adopt(free, t)
        self.stats.trees_adopted += 1
        self.stats.max_tree_size = max(self.stats.max_tree_size, len(tv))
        return None

    def _certificate(self, t: TreeRecord) -> MinorCertificate:
        t.slot = len(self.slots)
        trees = [s for s in self.slots if s is not None] + [t]
        sets = [s.vertices for s in trees]
        cross: dict[tuple[int, int], tuple[int, int]] = {}
        adj = self.g.adj
        for a in range(len(trees)):
            for b in range(a + 1, len(trees)):
                small, big = (a, b) if len(sets[a]) <= len(sets[b]) else (b, a)
                hit = min(((x, y) for x in sets[small] for y in adj[x] if y in sets[big]),
                          default=None)
                if hit is None:
                    raise InvariantViolation(f"trees {a} and {b} are not adjacent")
                cross[(a, b)] = hit if small == a else (hit[1], hit[0])
        return MinorCertificate(trees, cross, self.finder.radius_bound, self.stats)

    # ------------------------------------------------------------------
    # cutting with two BFS searches

    def _search(self, src: int, wvp: float, nvp: int, ell: int, edges: set[int] | None,
                tag: str) -> Iterator[tuple | None]:
        """One BFS in ``G[V']`` that yields ``None`` after every edge it visits.

        It finishes by yielding ``(tag, N, S, lighter_is_s, layers)`` once the
        layer condition holds.
        """
        g = self.g
        adj, inc, w, in_vp = g.adj, g.inc, g.weight, self.in_vp
        explored = {src}
        layer = [src]
        layer_w = [w[src]]
        nlayers = 0
        while True:
            ws = math.fsum(layer_w)
            wn = layer_w[-1]
            rest = math.fsum((wvp, -ws, wn))
            lighter_is_s = ws <= rest
            size = len(explored) if lighter_is_s else nvp - len(explored) + len(layer)
            if len(layer) * ell <= size:
                yield (tag, layer, explored, lighter_is_s, nlayers)
                return
            nxt: list[int] = []
            for x in layer:
                ex = inc[x]
                for j, y in enumerate(adj[x]):
                    if not in_vp[y]:
                        continue
                    if edges is not None:
                        edges.add(ex[j])
                    if y not in explored:
                        explored.add(y)
                        nxt.append(y)
                    yield None
            nlayers += 1
            layer = nxt
            layer_w.append(math.fsum(w[y] for y in nxt))
            if not nxt:
                # whole component explored; S' is S or its complement
                yield (tag, layer, explored, ws <= math.fsum((wvp, -ws)), nlayers)
                return

    def dual_bfs_cut(self, u: int, v: int) -> None:
        ell = self.params.ell
        wvp = math.fsum(self.g.weight[x] for x in self.vp)
        nvp = len(self.vp)
        eu: set[int] | None = set() if self.debug else None
        ev: set[int] | None = set() if self.debug else None
        searches = [self._search(u, wvp, nvp, ell, eu, "u")]
        if not self.single_search:
            searches.append(self._search(v, wvp, nvp, ell, ev, "v"))
        # layer-0 checks happen before any edge is visited
        result = None
        while result is None:
            for s in searches:
                step = next(s)
                if step is not None:
                    result = step
                    break
        tag, layer, explored, lighter_is_s, nlayers = result
        if self.debug:
            if eu is not None and ev is not None and eu & ev:
                raise InvariantViolation("the two searches visited a common edge")
            if nlayers > max(self.rho, 1):
                raise InvariantViolation(f"cut needed {nlayers} layers > rho={self.rho}")
        self._apply_cut(layer, explored, lighter_is_s, wvp)
        self.stats.cuts += 1
        self.stats.cut_layer_total += len(layer)
        self.stats.max_cut_layers = max(self.stats.max_cut_layers, nlayers)

    def _apply_cut(self, layer: list[int], explored: set[int], lighter_is_s: bool,
                   wvp: float) -> None:
        nset = set(layer)
        for x in layer:
            if not self.in_b[x]:
                self.in_b[x] = 1
                self.b_list.append(x)
        if lighter_is_s:
            moved = [x for x in explored if x not in nset]
            self._remove_from_vp(explored)
        else:
            moved = [x for x in self.vp if x not in explored]
            self._remove_from_vp(moved)
            self._remove_from_vp(layer)
        for x in moved:
            self.in_r[x] = 1
        self.cut_boundary_total += len(layer)
        self.finder.on_cut(layer, moved)
        if self.debug:
            wr = math.fsum(self.g.weight[x] for x in range(self.g.n) if self.in_r[x])
            if Fraction(wr) > Fraction(self.total) - Fraction(wvp) / 2:
                raise InvariantViolation(f"balance ledger broken: w(V_r)={wr} W'={wvp}")

    # ------------------------------------------------------------------

    def check_invariants(self) -> None:
        """Partition discipline and slot bookkeeping (debug mode)."""
        n = self.g.n
        vp_flags = {x for x in range(n) if self.in_vp[x]}
        if vp_flags != self.vp:
            raise InvariantViolation("V' flags and set disagree")
        mset: set[int] = set()
        for i, t in enumerate(self.slots):
            if t is None:
                continue
            if self.slot_sets[i] & mset:
                raise InvariantViolation("proper trees overlap")
            mset |= self.slot_sets[i]
        for x in range(n):
            if self.in_vp[x] and (self.in_m[x] or self.in_b[x] or self.in_r[x]):
                raise InvariantViolation(f"vertex {x} is in V' and in M, B or V_r")
            if not (self.in_vp[x] or self.in_m[x] or self.in_b[x] or self.in_r[x] or self.in_a[x]):
                raise InvariantViolation(f"vertex {x} fell out of every set")
            if self.in_m[x] and self.in_a[x]:
                raise InvariantViolation(f"vertex {x} is in both M and A")
            if bool(self.in_m[x]) != (x in mset):
                raise InvariantViolation(f"M flag of {x} disagrees with the slots")
        prev = self._prev
        cur = (len(self.vp), sum(self.in_a), sum(self.in_b))
        if prev is not None and (cur[0] > prev[0] or cur[1] < prev[1] or cur[2] < prev[2]):
            raise InvariantViolation("V' grew or A/B shrank")
        self._prev = cur

    def run(self) -> Outcome:
        t0 = time.perf_counter()
        stats = self.stats
        try:
            while True:
                heavy = self._heavy_component()
                if heavy is None:
                    break
                stats.iterations += 1
                self.restrict(heavy[0])
                self.prune_trees()
                u = self.choose_root()
                found = self.finder.find_tree(u)
                if isinstance(found, TreeRecord):
                    cert = self.adopt_tree(found)
                    if cert is not None:
                        return cert
                else:
                    v = self.finder.distant_vertex(u, found)
                    if self.debug:
                        dist = bfs_distances(self.g, u, self.in_vp)
                        if 0 <= dist[v] <= self.rho:
                            raise InvariantViolation(
                                f"distant vertex {v} is only {dist[v]} <= rho={self.rho} from {u}")
                    self.dual_bfs_cut(u, v)
                if self.debug:
                    self.check_invariants()
            sep = {x for x in range(self.g.n) if self.in_m[x] or self.in_b[x]}
            stats.extra["separator_size"] = len(sep)
            stats.extra["tree_vertices"] = sum(len(s) for s in self.slot_sets)
            stats.extra["cut_vertices"] = len(self.b_list)
            return Separator(sep, stats)
        finally:
            stats.wall_ms = (time.perf_counter() - t0) * 1000.0


# ---------------------------------------------------------------------------
# tree construction helpers

def bfs_tree(root: int, nbrs: dict[int, list[int]]) -> dict[int, int]:
    """BFS parent map over an explicit adjacency dict."""
    parent = {root: -1}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in nbrs.get(x, ()):
            if y not in parent:
                parent[y] = x
                queue.append(y)
    return parent


def pad_tree(g: WeightedGraph, parent: dict[int, int], depth: dict[int, int],
             allowed, target: int, max_depth: int, order: list[int]) -> None:
    """Grow ``parent`` in place by BFS until it has ``target`` vertices.

    ``order`` lists the current vertices by nondecreasing depth; new vertices
    are never deeper than ``max_depth``.
    """
    if len(parent) >= target:
        return
    queue = deque(order)
    adj = g.adj
    while queue and len(parent) < target:
        x = queue.popleft()
        dx = depth[x] + 1
        if dx > max_depth:
            continue
        for y in adj[x]:
            if y not in parent and allowed(y):
                parent[y] = x
                depth[y] = dx
                queue.append(y)
                if len(parent) >= target:
                    return


class OracleTreeFinder(TreeFinder):
    """Tree finding through ``h - 1`` decremental distance oracles.

    Oracle ``i`` models the graph on ``V`` holding all edges of
    ``G[(V \\ (M u A)) u V(T_i)]`` except the non-tree edges inside ``T_i``.
    Its horizon is ``d = 4 k rho`` with ``k = ceil(1/eps)``, so trees have
    radius at most ``d``.
    """

    def __init__(self, *, seed: int = 0, pad_trees: bool = True):
        self.seed = seed
        self.pad_trees = pad_trees

    def bind(self, run: GenericRun) -> None:
        super().bind(run)
        p = run.params
        self.k = p.k
        self.d = max(1, 4 * self.k * run.rho)
        self.radius_bound = self.d
        self.cap = 4 * p.h * self.d
        g = run.g
        edges = list(g.edges())
        self.oracles = [DecOracle(g.n, edges, OracleConfig(self.k, self.d, self.seed + i))
                        for i in range(p.h - 1)]

    def _delete(self, o: DecOracle, eid: int) -> None:
        if o.alive[eid]:
            o.delete_edge_id(eid)
            self.run.stats.oracle_deletions += 1

    def find_tree(self, u: int) -> TreeRecord | int:
        run = self.run
        proper = run.proper_slots()
        paths: list[list[int]] = []
        for i in proper[1:]:
            o = self.oracles[i]
            est = o.query_nearest(u, run.slot_sets[i])
            if est.value > self.d:
                return i
            verts, _ = o.path_steps(est)
            cut = []
            for x in verts:
                cut.append(x)
                if run.incident_to_slot(x, i):
                    break
            else:
                raise AssertionError("oracle path never touched its target tree")
            paths.append(cut)
        return self.build_tree(u, paths)

    def build_tree(self, u: int, paths: list[list[int]]) -> TreeRecord:
        run = self.run
        nbrs: dict[int, list[int]] = {}
        for path in paths:
            for a, b in zip(path, path[1:]):
                nbrs.setdefault(a, []).append(b)
                nbrs.setdefault(b, []).append(a)
        parent = bfs_tree(u, nbrs)
        order = list(parent)
        depth = {u: 0}
        for x in order[1:]:
            depth[x] = depth[parent[x]] + 1
        if self.pad_trees:
            pad_tree(run.g, parent, depth, run.free_vertex, self.d, self.d, order)
        if len(parent) > self.cap:
            raise AssertionError(f"tree of {len(parent)} vertices exceeds cap {self.cap}")
        return TreeRecord(-1, u, parent, self.radius_bound)

    def on_adopt(self, slot: int, tree: TreeRecord) -> None:
        g = self.run.g
        tv = self.run.slot_sets[slot]
        tree_e = {g.edge_id(p, v) for v, p in tree.parent.items() if p >= 0}
        for x in tv:
            for y, e in zip(g.adj[x], g.inc[x]):
                for j, o in enumerate(self.oracles):
                    if j != slot or (y in tv and e not in tree_e):
                        self._delete(o, e)

    def on_prune(self, slot: int, tree: TreeRecord) -> None:
        g = self.run.g
        o = self.oracles[slot]
        for x in self.run.slot_sets[slot]:
            for e in g.inc[x]:
                self._delete(o, e)


class ExactTreeFinder(TreeFinder):
    """Reference finder using exact BFS in ``G[V \\ (M u A)]`` with ``C = 1``.

    Used to test the loop independently of the oracles.
    """

    def __init__(self, *, pad_trees: bool = False):
        self.pad_trees = pad_trees

    def bind(self, run: GenericRun) -> None:
        super().bind(run)
        self.radius_bound = run.rho

    def find_tree(self, u: int) -> TreeRecord | int:
        run = self.run
        g = run.g
        rho = run.rho
        parent = {u: -1}
        depth = {u: 0}
        queue = deque([u])
        while queue:
            x = queue.popleft()
            if depth[x] >= rho:
                continue
            for y in g.adj[x]:
                if y not in parent and run.free_vertex(y):
                    parent[y] = x
                    depth[y] = depth[x] + 1
                    queue.append(y)
        proper = run.proper_slots()
        keep = {u}
        for i in proper[1:]:
            hits = [x for x in parent if run.incident_to_slot(x, i)]
            if not hits:
                return i
            x = min(hits, key=lambda y: (depth[y], y))
            while x not in keep:
                keep.add(x)
                x = parent[x]
        tree = {x: parent[x] for x in keep}
        if self.pad_trees:
            order = sorted(keep, key=lambda y: depth[y])
            d2 = {x: depth[x] for x in keep}
            pad_tree(g, tree, d2, run.free_vertex, rho, rho, order)
        return TreeRecord(-1, u, tree, self.radius_bound)


def generic_run(g: WeightedGraph, params: ProblemParams, finder: TreeFinder, **kw) -> Outcome:
    return GenericRun(g, params, finder, **kw).run()


def run_algorithm1(g: WeightedGraph, params: ProblemParams, *, seed: int = 0,
                   pad_trees: bool = True, debug: bool = False,
                   single_search: bool = False, sparsity_check: bool = False,
                   c_sp: float = 8.0) -> Outcome:
    """Separator of size ``O(h^2 ell log n + n/ell)`` or a ``K_h`` certificate.

    With ``sparsity_check`` the edge-count gate runs first and a dense graph
    is rejected without a certificate.
    """
    stats = RunStats(algo=1)
    if sparsity_check and not sparsity_gate(g, params, c_sp):
        return Rejected("dense", stats)
    finder = OracleTreeFinder(seed=seed, pad_trees=pad_trees)
    run = GenericRun(g, params, finder, debug=debug, single_search=single_search, stats=stats)
    out = run.run()
    stats.extra["rho"] = run.rho
    stats.extra["d"] = finder.d
    return out
