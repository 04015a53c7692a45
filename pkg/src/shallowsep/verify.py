"""Independent brute-force checkers.

Nothing here imports the modules being checked.  Inputs are read through a
tiny duck-typed view (``n``, ``edges()``, ``weight``) so the checkers also
work on plain edge lists.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence


@dataclass
class Report:
    ok: bool
    kind: str = "ok"
    detail: dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "kind": self.kind, **self.detail}


def _fail(kind: str, **detail) -> Report:
    return Report(False, kind, detail)


def _adjacency(n: int, edges: Iterable[tuple[int, int]]) -> list[set[int]]:
    adj: list[set[int]] = [set() for _ in range(n)]
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    return adj


def _view(g) -> tuple[int, list[set[int]], list[float]]:
    n = g.n
    weights = list(getattr(g, "weight", None) or [1.0] * n)
    return n, _adjacency(n, g.edges()), weights


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    return Fraction(c).limit_denominator(10**6)


def _flood(n: int, adj: list[set[int]], alive: Sequence[bool]) -> list[list[int]]:
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s] or not alive[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if alive[y] and not seen[y]:
                    seen[y] = True
                    comp.append(y)
                    queue.append(y)
        comps.append(comp)
    return comps


def verify_separator(g, s: Iterable[int], c=Fraction(2, 3)) -> Report:
    """Every component of ``G - s`` weighs at most ``c * w(V)`` (exact)."""
    n, adj, w = _view(g)
    sset = set(s)
    bad = [x for x in sset if not 0 <= x < n]
    if bad:
        return _fail("range", vertices=sorted(bad)[:10])
    total = Fraction(math.fsum(w))
    limit = _as_fraction(c) * total
    alive = [x not in sset for x in range(n)]
    heaviest = Fraction(0)
    for comp in _flood(n, adj, alive):
        wc = Fraction(math.fsum(w[x] for x in comp))
        heaviest = max(heaviest, wc)
        if wc > limit:
            return _fail("balance", component_size=len(comp), weight=float(wc),
                         limit=float(limit), smallest=min(comp))
    return Report(True, detail={"separator_size": len(sset), "heaviest": float(heaviest),
                                "limit": float(limit)})


def verify_minor_certificate(g, trees: Sequence[Mapping[int, int]], h: int,
                             radius_bound: float, roots: Sequence[int] | None = None
                             ) -> Report:
    """Check ``h`` disjoint, pairwise adjacent trees of bounded radius.

    Each tree is a parent map (root maps to -1).  When ``roots`` is omitted
    the root is read off the parent map.
    """
    n, adj, _ = _view(g)
    if len(trees) != h:
        return _fail("count", trees=len(trees), h=h)
    owner: dict[int, int] = {}
    for i, parent in enumerate(trees):
        if not parent:
            return _fail("empty", tree=i)
        for v in parent:
            if not 0 <= v < n:
                return _fail("range", tree=i, vertex=v)
            if v in owner:
                return _fail("disjointness", trees=[owner[v], i], vertex=v)
            owner[v] = i
    for i, parent in enumerate(trees):
        rs = [v for v, p in parent.items() if p < 0]
        if len(rs) != 1:
            return _fail("root", tree=i, roots=rs[:5])
        root = rs[0]
        if roots is not None and roots[i] != root:
            return _fail("root", tree=i, expected=roots[i], found=root)
        children: dict[int, list[int]] = {}
        for v, p in parent.items():
            if p < 0:
                continue
            if p not in parent:
                return _fail("not_a_tree", tree=i, vertex=v, parent=p)
            if p not in adj[v]:
                return _fail("non_edge", tree=i, edge=[p, v])
            children.setdefault(p, []).append(v)
        # tree edges are exactly |T|-1 parent links; reachability from the
        # root rules out cycles among them
        depth = {root: 0}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in children.get(x, ()):
                if y in depth:
                    return _fail("not_a_tree", tree=i, vertex=y)
                depth[y] = depth[x] + 1
                queue.append(y)
        if len(depth) != len(parent):
            return _fail("not_a_tree", tree=i, unreachable=len(parent) - len(depth))
        # radius is measured inside the tree itself
        if max(depth.values()) > radius_bound:
            return _fail("radius", tree=i, radius=max(depth.values()), bound=radius_bound)
    touching: set[tuple[int, int]] = set()
    for v, i in owner.items():
        for y in adj[v]:
            j = owner.get(y)
            if j is not None and j != i:
                touching.add((min(i, j), max(i, j)))
    for i in range(h):
        for j in range(i + 1, h):
            if (i, j) not in touching:
                return _fail("adjacency", trees=[i, j])
    return Report(True, detail={"h": h, "max_radius_bound": radius_bound})


def exact_distance_oracle(g, forbidden: Iterable[int] = ()):
    """Return ``query(u, v)`` giving hop distances in ``g - forbidden``."""
    n, adj, _ = _view(g)
    blocked = set(forbidden)
    cache: dict[int, list[float]] = {}

    def distances(u: int) -> list[float]:
        dist = [math.inf] * n
        if u in blocked:
            return dist
        dist[u] = 0
        queue = deque([u])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in blocked and dist[y] == math.inf:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        return dist

    def query(u: int, v: int) -> float:
        if u not in cache:
            cache[u] = distances(u)
        return cache[u][v]

    return query


def interior_forbidden_distances(vertices: Iterable[int], edges: Iterable[tuple[int, int]],
                                 boundary: Iterable[int], source: int) -> dict[int, float]:
    """Hop distances from ``source`` where no path passes *through* a boundary vertex.

    Boundary vertices other than the source can be reached but not expanded.
    """
    adj: dict[int, set[int]] = {v: set() for v in vertices}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    bset = set(boundary)
    dist = {v: math.inf for v in adj}
    dist[source] = 0
    queue = deque([source])
    while queue:
        x = queue.popleft()
        if x != source and x in bset:
            continue
        for y in adj[x]:
            if dist[y] == math.inf:
                dist[y] = dist[x] + 1
                queue.append(y)
    return dist


def verify_clustering(g, clusters: Sequence[Mapping[str, Any]], r: int | None = None,
                      per_cluster_budget: float | None = None,
                      total_budget: float | None = None,
                      nested: bool = False) -> Report:
    """Check an (optionally nested) clustering given as plain dicts.

    Each cluster dict has ``id``, ``edges`` (list of vertex pairs),
    ``boundary`` and, for nested input, ``parent`` and ``level``.  The edge
    partition is checked on the top level (``parent`` is ``None``) and among
    the children of every cluster.
    """
    n, adj, _ = _view(g)
    all_edges = {(min(a, b), max(a, b)) for a, b in g.edges()}
    by_id = {c["id"]: c for c in clusters}
    if len(by_id) != len(clusters):
        return _fail("duplicate_id")
    top = [c for c in clusters if c.get("parent") is None]
    children: dict[Any, list] = {}
    for c in clusters:
        if c.get("parent") is not None:
            children.setdefault(c["parent"], []).append(c)

    def norm(c) -> list[tuple[int, int]]:
        return [(min(a, b), max(a, b)) for a, b in c["edges"]]

    def partition(group, target: set, where) -> Report | None:
        seen: dict[tuple[int, int], Any] = {}
        for c in group:
            for e in norm(c):
                if e in seen:
                    return _fail("edge_twice", edge=list(e), clusters=[seen[e], c["id"]], where=where)
                seen[e] = c["id"]
        if set(seen) != target:
            missing = sorted(target - set(seen))[:5]
            extra = sorted(set(seen) - target)[:5]
            return _fail("edge_partition", missing=missing, extra=extra, where=where)
        return None

    bad = partition(top, all_edges, "top")
    if bad is not None:
        return bad
    for pid, group in children.items():
        if pid not in by_id:
            return _fail("parent", cluster=group[0]["id"], parent=pid)
        bad = partition(group, set(norm(by_id[pid])), pid)
        if bad is not None:
            return bad
    # boundary: vertices shared with another cluster of the same family
    total_boundary = 0
    families = [top] + list(children.values())
    for fam in families:
        count: dict[int, int] = {}
        for c in fam:
            for v in {x for e in c["edges"] for x in e} | set(c.get("vertices", ())):
                count[v] = count.get(v, 0) + 1
        for c in fam:
            verts = {x for e in c["edges"] for x in e} | set(c.get("vertices", ()))
            if c["edges"]:
                comp = _flood_subset(verts, c["edges"])
                if comp != len(verts):
                    return _fail("disconnected", cluster=c["id"])
            shared = {v for v in verts if count[v] > 1}
            declared = set(c["boundary"])
            if not shared <= declared or not declared <= verts:
                return _fail("boundary", cluster=c["id"],
                             undeclared=sorted(shared - declared)[:5],
                             foreign=sorted(declared - verts)[:5])
            if c.get("parent") is None:
                if r is not None and len(verts) > r:
                    return _fail("size", cluster=c["id"], size=len(verts), r=r)
                if per_cluster_budget is not None and len(declared) > per_cluster_budget:
                    return _fail("cluster_boundary_budget", cluster=c["id"],
                                 boundary=len(declared), budget=per_cluster_budget)
                total_boundary += len(declared)
    if total_budget is not None and total_boundary > total_budget:
        return _fail("total_boundary_budget", total=total_boundary, budget=total_budget)
    if nested:
        for c in clusters:
            for ch in children.get(c["id"], ()):
                if ch.get("level") != c.get("level", 0) + 1:
                    return _fail("level", cluster=ch["id"])
                if len(ch["edges"]) >= len(c["edges"]):
                    return _fail("no_decrease", cluster=ch["id"], parent=c["id"])
            if not children.get(c["id"]) and len(c["edges"]) > 1:
                return _fail("leaf_not_edge", cluster=c["id"], edges=len(c["edges"]))
    return Report(True, detail={"clusters": len(clusters), "top_boundary_total": total_boundary})


def _flood_subset(verts: set[int], edges) -> int:
    adj: dict[int, list[int]] = {v: [] for v in verts}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    start = next(iter(verts))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen)


def verify_outcome(g, outcome: Mapping[str, Any], h: int, radius_bound: float | None = None,
                   c=Fraction(2, 3)) -> Report:
    """Dispatch on a JSON outcome dict (schema 1)."""
    kind = outcome.get("type")
    if kind == "separator":
        return verify_separator(g, outcome["vertices"], c)
    if kind == "certificate":
        trees = [{v: p for v, p in t["parent"]} for t in outcome["trees"]]
        roots = [t["root"] for t in outcome["trees"]]
        bound = outcome["radius_bound"] if radius_bound is None else radius_bound
        return verify_minor_certificate(g, trees, h, bound, roots)
    if kind == "rejected":
        return Report(True, "rejected", {"reason": outcome.get("reason")})
    return _fail("unknown_type", type=kind)
