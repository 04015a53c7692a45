"""r-clusterings and nested r-clusterings built by recursive separation.

A cluster is a connected edge set of ``g``.  Splitting a cluster ``P`` runs
the oracle-driven separator on ``P`` and turns every component ``C`` of
``P - S`` into the child ``P[V(C) u B_C]`` where ``B_C`` are the separator
vertices next to ``C``.  An edge between two separator vertices that would
land in several children is kept in the first one; edges that land in none
are grouped into connected pieces of their own.  When a split makes no
progress the cluster is cut along a BFS prefix instead.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import IO, Any

from ..graph import ProblemParams, WeightedGraph
from ..outcome import MinorCertificate, Rejected, TreeRecord
from ..separator import run_algorithm1

FORMAT_VERSION = 1


class RegimeError(ValueError):
    """Parameters outside the range where the construction applies."""


@dataclass
class Budgets:
    """Constants that make the polylog-hidden bounds concrete."""

    b_c: float = 4.0      # per-cluster boundary: b_c * sqrt(r) * log2(n+1)
    b_t: float = 4.0      # total boundary: b_t * (n / sqrt(r)) * log2(n+1)^2
    b_m: float = 4.0      # mini clusters of one cluster: b_m * |dC| * log2(|dC|+2)
    b_all: float = 4.0    # all mini clusters: b_all * (n / sqrt(l)) * log2(n+1)^2
    slack: float = 32.0   # envelope factor for sum |C||dC| and sum |dC|^3
    c_sp: float = 8.0     # sparsity gate coefficient
    c_min: float = 1.0    # r must exceed c_min * ln n
    c_x: float = 8.0      # active set bound c_x * (l ln n + n / l)
    c_e: float = 4.0      # expanded tree cap c_e * l * sqrt(n) * log2(n+1)

    def per_cluster(self, r: int, n: int) -> float:
        return self.b_c * math.sqrt(r) * math.log2(n + 1)

    def total(self, r: int, n: int) -> float:
        return self.b_t * (n / math.sqrt(r)) * math.log2(n + 1) ** 2

    def update(self, values: dict[str, Any]) -> Budgets:
        for k, v in values.items():
            if not hasattr(self, k):
                raise KeyError(f"unknown budget constant {k!r}")
            setattr(self, k, float(v))
        return self


@dataclass
class Cluster:
    id: int
    edges: list[int]
    vertices: list[int]
    boundary: set[int] = field(default_factory=set)
    level: int = 1
    parent: int | None = None
    children: list[int] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.vertices)

    def interior(self) -> list[int]:
        return [v for v in self.vertices if v not in self.boundary]


@dataclass
class Clustering:
    g: WeightedGraph
    clusters: dict[int, Cluster]
    top: list[int]
    r: int
    nested: bool = False
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __iter__(self):
        return iter(self.clusters.values())

    def level1(self) -> list[Cluster]:
        return [self.clusters[i] for i in self.top]

    def children_of(self, cid: int) -> list[Cluster]:
        return [self.clusters[c] for c in self.clusters[cid].children]

    def as_dicts(self) -> list[dict]:
        g = self.g
        return [{"id": c.id, "edges": [(g.eu[e], g.ev[e]) for e in c.edges],
                 "vertices": c.vertices, "boundary": sorted(c.boundary),
                 "parent": c.parent, "level": c.level} for c in self.clusters.values()]

    def to_json(self) -> dict:
        return {"version": FORMAT_VERSION, "r": self.r, "nested": self.nested,
                "top": self.top,
                "clusters": [{"id": c.id, "edges": c.edges, "vertices": c.vertices,
                              "boundary": sorted(c.boundary), "level": c.level,
                              "parent": c.parent, "children": c.children}
                             for c in self.clusters.values()]}


def dump_clustering(cl: Clustering, out: IO[str]) -> None:
    json.dump(cl.to_json(), out)


def load_clustering(g: WeightedGraph, src: IO[str]) -> Clustering:
    d = json.load(src)
    if d.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported clustering format {d.get('version')!r}")
    clusters = {c["id"]: Cluster(c["id"], c["edges"], c["vertices"], set(c["boundary"]),
                                 c["level"], c["parent"], c["children"])
                for c in d["clusters"]}
    return Clustering(g, clusters, d["top"], d["r"], d["nested"])


# ---------------------------------------------------------------------------
# splitting one edge set

class _Splitter:
    """Shared state of one clustering build."""

    def __init__(self, g: WeightedGraph, p: ProblemParams, seed: int):
        self.g = g
        self.p = p
        self.seed = seed
        self.eps1 = p.epsilon / 3.0
        self.calls = 0
        self.fallbacks = 0

    def vertices_of(self, edges: list[int]) -> list[int]:
        g = self.g
        return sorted({x for e in edges for x in (g.eu[e], g.ev[e])})

    def separate(self, edges: list[int], ell: int, boundary_weights: set[int] | None
                 ) -> list[list[int]] | MinorCertificate | Rejected:
        """Children edge sets of one split (or the certificate that stopped it)."""
        g = self.g
        sub, orig = g.edge_subgraph(edges)
        if boundary_weights is not None:
            sub = sub.with_weights([1.0 if orig[i] in boundary_weights else 0.0
                                    for i in range(sub.n)])
        else:
            sub = sub.with_weights([1.0] * sub.n)
        params = ProblemParams(self.p.h, max(1, ell), self.eps1)
        self.calls += 1
        out = run_algorithm1(sub, params, seed=self.seed, pad_trees=False)
        if isinstance(out, MinorCertificate):
            return _lift_certificate(out, orig)
        if isinstance(out, Rejected):
            return out
        sep = out.vertices
        # components of sub - sep
        comp = [-1] * sub.n
        ncomp = 0
        for s in range(sub.n):
            if s in sep or comp[s] >= 0:
                continue
            comp[s] = ncomp
            stack = [s]
            while stack:
                x = stack.pop()
                for y in sub.adj[x]:
                    if y not in sep and comp[y] < 0:
                        comp[y] = ncomp
                        stack.append(y)
            ncomp += 1
        groups: list[list[int]] = [[] for _ in range(ncomp)]
        # separator vertex -> components it touches
        touch: dict[int, set[int]] = {}
        for s in sep:
            touch[s] = {comp[y] for y in sub.adj[s] if comp[y] >= 0}
        loose: list[int] = []
        for local, e in enumerate(edges):
            a, b = sub.eu[local], sub.ev[local]
            ca, cb = comp[a], comp[b]
            if ca >= 0:
                groups[ca].append(e)
            elif cb >= 0:
                groups[cb].append(e)
            else:
                common = touch[a] & touch[b]
                if common:
                    groups[min(common)].append(e)
                else:
                    loose.append(e)
        # edges running only between separator vertices form their own pieces
        return [grp for grp in groups if grp] + edge_components(g, loose)

    def bfs_prefix_split(self, edges: list[int]) -> list[list[int]]:
        """Edges inside the first half of a BFS order, then the rest by components."""
        self.fallbacks += 1
        g = self.g
        adj: dict[int, list[tuple[int, int]]] = {}
        for e in edges:
            a, b = g.eu[e], g.ev[e]
            adj.setdefault(a, []).append((b, e))
            adj.setdefault(b, []).append((a, e))
        start = min(adj)
        order = [start]
        seen = {start}
        i = 0
        while i < len(order):
            for y, _ in sorted(adj[order[i]]):
                if y not in seen:
                    seen.add(y)
                    order.append(y)
            i += 1
        half = set(order[: (len(order) + 1) // 2])
        first = [e for e in edges if g.eu[e] in half and g.ev[e] in half]
        rest = [e for e in edges if not (g.eu[e] in half and g.ev[e] in half)]
        return [first] + edge_components(g, rest)


def edge_components(g: WeightedGraph, edges: list[int]) -> list[list[int]]:
    """Split an edge set into connected pieces (ordered by smallest edge id)."""
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        root = x
        while parent.setdefault(root, root) != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for e in edges:
        ra, rb = find(g.eu[e]), find(g.ev[e])
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for e in sorted(edges):
        groups.setdefault(find(g.eu[e]), []).append(e)
    return sorted(groups.values(), key=lambda grp: grp[0])


def _lift_certificate(cert: MinorCertificate, orig: list[int]) -> MinorCertificate:
    trees = [TreeRecord(t.slot, orig[t.root],
                        {orig[v]: (orig[p] if p >= 0 else -1) for v, p in t.parent.items()},
                        t.radius_bound) for t in cert.trees]
    cross = {k: (orig[a], orig[b]) for k, (a, b) in cert.cross_edges.items()}
    return MinorCertificate(trees, cross, cert.radius_bound, cert.stats)


def lift_certificate(cert: MinorCertificate, orig: list[int]) -> MinorCertificate:
    return _lift_certificate(cert, orig)


# ---------------------------------------------------------------------------
# r-clustering

def check_regime(n: int, r: int, budgets: Budgets) -> None:
    if n > 1 and r <= budgets.c_min * math.log(n):
        raise RegimeError(f"r={r} must exceed {budgets.c_min} * ln n = {budgets.c_min * math.log(n):.2f}")


def _boundaries(g: WeightedGraph, pieces: list[list[int]]) -> list[set[int]]:
    count: dict[int, int] = {}
    verts = []
    for edges in pieces:
        vs = {x for e in edges for x in (g.eu[e], g.ev[e])}
        verts.append(vs)
        for v in vs:
            count[v] = count.get(v, 0) + 1
    return [{v for v in vs if count[v] > 1} for vs in verts]


def build_r_clustering(g: WeightedGraph, p: ProblemParams, r: int, *,
                       budgets: Budgets | None = None, seed: int = 0,
                       check: bool = True) -> Clustering | MinorCertificate | Rejected:
    """Clusters of at most ``r`` vertices whose edge sets partition ``E``."""
    budgets = budgets or Budgets()
    n = g.n
    if check:
        check_regime(n, r, budgets)
    sp = _Splitter(g, p, seed)
    eps1 = sp.eps1
    ell1 = max(1, math.ceil(r ** (0.5 - eps1) * max(n, 2) ** eps1))
    max_depth = 4 * max(1, math.ceil(math.log2(max(n, 2)))) + 4
    done: list[list[int]] = []
    stack = [(edges, 0) for edges in reversed(edge_components(g, list(range(g.m))))]
    deepest = 0
    while stack:
        edges, depth = stack.pop()
        deepest = max(deepest, depth)
        nv = len(sp.vertices_of(edges))
        if nv <= r or len(edges) <= 1:
            done.append(edges)
            continue
        if depth > max_depth:
            raise RuntimeError(f"recursion deeper than {max_depth} levels while clustering")
        kids = _split_with_progress(sp, edges, nv, ell1, None)
        if not isinstance(kids, list):
            return kids
        stack.extend((k, depth + 1) for k in reversed(kids))

    # re-split clusters whose boundary exceeds the per-cluster budget
    per = budgets.per_cluster(r, n)
    resplits = 0
    for _ in range(max_depth):
        bnds = _boundaries(g, done)
        over = [i for i, b in enumerate(bnds) if len(b) > per and len(done[i]) > 1]
        if not over:
            break
        nxt: list[list[int]] = []
        overset = set(over)
        for i, edges in enumerate(done):
            if i not in overset:
                nxt.append(edges)
                continue
            resplits += 1
            nv = len(sp.vertices_of(edges))
            ell_b = max(1, math.ceil(math.sqrt(len(bnds[i]))))
            kids = _split_with_progress(sp, edges, nv, ell_b, bnds[i])
            if not isinstance(kids, list):
                return kids
            nxt.extend(kids)
        done = nxt

    bnds = _boundaries(g, done)
    clusters: dict[int, Cluster] = {}
    for i, (edges, b) in enumerate(zip(done, bnds)):
        clusters[i] = Cluster(i, sorted(edges), sp.vertices_of(edges), b, 1, None, [])
    cl = Clustering(g, clusters, list(clusters), r)
    total_b = sum(len(b) for b in bnds)
    cl.diagnostics.update({
        "separator_calls": sp.calls, "fallback_splits": sp.fallbacks,
        "resplits": resplits, "depth": deepest, "ell_prime": ell1,
        "total_boundary": total_b, "max_boundary": max((len(b) for b in bnds), default=0),
        "per_cluster_budget": per, "total_budget": budgets.total(r, n),
        "within_budget": total_b <= budgets.total(r, n)
        and all(len(b) <= per for b in bnds),
    })
    return cl


def _split_with_progress(sp: _Splitter, edges: list[int], nv: int, ell: int,
                         boundary_weights: set[int] | None
                         ) -> list[list[int]] | MinorCertificate | Rejected:
    kids = sp.separate(edges, ell, boundary_weights)
    if not isinstance(kids, list):
        return kids
    stuck = len(kids) <= 1 or any(len(k) >= len(edges) for k in kids)
    if boundary_weights is None and not stuck:
        # vertex counts must shrink too, or the recursion could stall
        stuck = any(len(sp.vertices_of(k)) >= nv for k in kids)
    if stuck:
        kids = sp.bfs_prefix_split(edges)
    return kids


# ---------------------------------------------------------------------------
# nested clustering

def build_nested(g: WeightedGraph, p: ProblemParams, r: int, *,
                 budgets: Budgets | None = None, seed: int = 0,
                 check: bool = True, base: Clustering | None = None
                 ) -> Clustering | MinorCertificate | Rejected:
    """Refine every cluster recursively down to single edges.

    A child's boundary is the parent's boundary inside the child plus the
    vertices it shares with its siblings.
    """
    if base is None:
        base = build_r_clustering(g, p, r, budgets=budgets, seed=seed, check=check)
        if not isinstance(base, Clustering):
            return base
    sp = _Splitter(g, p, seed)
    clusters = dict(base.clusters)
    next_id = max(clusters, default=-1) + 1
    queue = deque(base.top)
    max_level = 1
    while queue:
        cid = queue.popleft()
        c = clusters[cid]
        if len(c.edges) <= 1:
            continue
        if len(c.edges) == 2:
            kids = [[c.edges[0]], [c.edges[1]]]
        else:
            ell = max(1, math.ceil(math.sqrt(c.size)))
            kids = sp.separate(c.edges, ell, None)
            if not isinstance(kids, list):
                return kids
            if len(kids) <= 1 or any(len(k) >= len(c.edges) for k in kids):
                kids = sp.bfs_prefix_split(c.edges)
        shared = _boundaries(g, kids)
        for edges, sb in zip(kids, shared):
            verts = sp.vertices_of(edges)
            bnd = sb | (c.boundary & set(verts))
            child = Cluster(next_id, sorted(edges), verts, bnd, c.level + 1, cid, [])
            clusters[next_id] = child
            c.children.append(next_id)
            queue.append(next_id)
            max_level = max(max_level, child.level)
            next_id += 1
    cl = Clustering(g, clusters, list(base.top), r, nested=True)
    cl.diagnostics.update(base.diagnostics)
    cl.diagnostics.update({"levels": max_level, "nested_calls": sp.calls,
                           "nested_fallbacks": sp.fallbacks, "clusters": len(clusters)})
    return cl


def envelope_sums(cl: Clustering, level1_only: bool = True) -> dict[str, float]:
    """``sum |C||dC|`` and ``sum |dC|^3`` over the clustering."""
    cs = cl.level1() if level1_only else list(cl)
    return {"size_boundary": float(sum(c.size * len(c.boundary) for c in cs)),
            "boundary_cubed": float(sum(len(c.boundary) ** 3 for c in cs))}
