"""Vertex-weighted undirected graphs and the basic searches built on them.

Vertices are dense integers ``0..n-1``.  Every edge has an integer id in
``0..m-1``; adjacency lists carry the neighbour and the edge id side by side
so that decremental structures can switch edges off by id.
"""

from __future__ import annotations

import io
import math
from collections import deque
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Sequence


class GraphError(ValueError):
    """Raised when a graph violates its structural invariants."""


class ParseError(GraphError):
    """Raised by :func:`load_graph` with the offending line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class WeightedGraph:
    """Immutable simple undirected graph with non-negative vertex weights."""

    __slots__ = ("n", "m", "adj", "inc", "eu", "ev", "weight", "_total")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = (),
                 weights: Sequence[float] | None = None):
        if n < 0:
            raise GraphError("vertex count must be non-negative")
        ids = list(range(n))
        adj: list[list[int]] = [[] for _ in ids]
        inc: list[list[int]] = [[] for _ in ids]
        eu: list[int] = []
        ev: list[int] = []
        seen: set[int] = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            a, b = (u, v) if u < v else (v, u)
            key = a * n + b
            if key in seen:
                raise GraphError(f"duplicate edge ({a}, {b})")
            seen.add(key)
            eid = len(eu)
            a, b = ids[a], ids[b]
            eu.append(a)
            ev.append(b)
            adj[a].append(b)
            inc[a].append(eid)
            adj[b].append(a)
            inc[b].append(eid)
        if weights is None:
            wts = [1.0] * n
        else:
            wts = [float(x) for x in weights]
            if len(wts) != n:
                raise GraphError(f"expected {n} weights, got {len(wts)}")
            for v, x in enumerate(wts):
                if not (x >= 0.0) or math.isinf(x):
                    raise GraphError(f"weight of vertex {v} must be finite and >= 0, got {x}")
        self.n = n
        self.m = len(eu)
        self.adj = adj
        self.inc = inc
        self.eu = eu
        self.ev = ev
        self.weight = wts
        self._total = math.fsum(wts)

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, m={self.m})"

    def total_weight(self) -> float:
        return self._total

    def weight_of(self, vertices: Iterable[int]) -> float:
        w = self.weight
        return math.fsum(w[v] for v in vertices)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def edges(self) -> Iterator[tuple[int, int]]:
        return zip(self.eu, self.ev)

    def endpoints(self, eid: int) -> tuple[int, int]:
        return self.eu[eid], self.ev[eid]

    def edge_id(self, u: int, v: int) -> int:
        """Id of edge ``{u, v}``, or -1 if absent.  Scans the shorter list."""
        if len(self.adj[u]) > len(self.adj[v]):
            u, v = v, u
        for x, e in zip(self.adj[u], self.inc[u]):
            if x == v:
                return e
        return -1

    def has_edge(self, u: int, v: int) -> bool:
        return self.edge_id(u, v) >= 0

    def with_weights(self, weights: Sequence[float]) -> WeightedGraph:
        return WeightedGraph(self.n, self.edges(), weights)

    def induced(self, vertices: Iterable[int]) -> tuple[WeightedGraph, list[int]]:
        """Induced subgraph on ``vertices`` relabelled densely by ascending id.

        Returns the subgraph and ``orig`` with ``orig[new_id] = old_id``.
        """
        orig = sorted(set(vertices))
        index = {v: i for i, v in enumerate(orig)}
        edges = []
        for i, v in enumerate(orig):
            for x in self.adj[v]:
                j = index.get(x)
                if j is not None and i < j:
                    edges.append((i, j))
        return WeightedGraph(len(orig), edges, [self.weight[v] for v in orig]), orig

    def edge_subgraph(self, edge_ids: Iterable[int]) -> tuple[WeightedGraph, list[int]]:
        """Subgraph formed by the given edges and their endpoints (relabelled)."""
        eids = list(edge_ids)
        orig = sorted({x for e in eids for x in (self.eu[e], self.ev[e])})
        index = {v: i for i, v in enumerate(orig)}
        edges = [(index[self.eu[e]], index[self.ev[e]]) for e in eids]
        return WeightedGraph(len(orig), edges, [self.weight[v] for v in orig]), orig


@dataclass(frozen=True)
class ProblemParams:
    """Parameters of one separator run.

    ``h`` is the excluded clique size, ``ell`` the depth parameter and
    ``epsilon`` the stretch/time trade-off constant.
    """

    h: int
    ell: int
    epsilon: float = 1.0
    balance_c: float = field(default=2.0 / 3.0, init=False)

    def __post_init__(self):
        if int(self.h) != self.h or self.h < 2:
            raise ValueError(f"h must be an integer >= 2, got {self.h}")
        if int(self.ell) != self.ell or self.ell < 1:
            raise ValueError(f"ell must be an integer >= 1, got {self.ell}")
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")

    def rho(self, n: int) -> int:
        """``2 * ceil(ell * ln n)`` for the original vertex count ``n``."""
        if n <= 1:
            return 0
        return 2 * math.ceil(self.ell * math.log(n))

    @property
    def k(self) -> int:
        """Oracle stretch parameter ``ceil(1/epsilon)``."""
        return math.ceil(1.0 / self.epsilon - 1e-12)


# ---------------------------------------------------------------------------
# parsing and writing

def load_graph(source: IO[str] | IO[bytes] | str | bytes,
               format: str = "edge-list") -> WeightedGraph:
    """Parse a graph from a stream or string.

    ``edge-list`` uses 0-based ids; ``dimacs`` uses 1-based ids.  Weight
    lines are ``w <vid> <float>`` (``n`` is accepted as a DIMACS synonym);
    vertices without one get weight 1.0.
    """
    if format not in ("edge-list", "dimacs"):
        raise ValueError(f"unknown graph format {format!r}")
    if isinstance(source, (str, bytes)):
        text = source.decode() if isinstance(source, bytes) else source
        lines: Iterable = io.StringIO(text)
    else:
        lines = source
    base = 1 if format == "dimacs" else 0
    n = -1
    declared_m = -1
    weights: list[float] = []
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()

    def vid(tok: str, lineno: int) -> int:
        try:
            v = int(tok) - base
        except ValueError:
            raise ParseError(lineno, f"bad vertex id {tok!r}") from None
        if not 0 <= v < n:
            raise ParseError(lineno, f"vertex id {tok} out of range")
        return v

    for lineno, raw in enumerate(lines, 1):
        line = raw.decode() if isinstance(raw, bytes) else raw
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        tag = parts[0]
        if tag == "p":
            if n >= 0:
                raise ParseError(lineno, "second header line")
            nums = parts[2:] if len(parts) == 4 else parts[1:]
            if len(nums) != 2:
                raise ParseError(lineno, "header must be 'p <n> <m>'")
            try:
                n, declared_m = int(nums[0]), int(nums[1])
            except ValueError:
                raise ParseError(lineno, "non-integer header field") from None
            if n < 0 or declared_m < 0:
                raise ParseError(lineno, "negative header field")
            weights = [1.0] * n
            continue
        if n < 0:
            raise ParseError(lineno, "data before header line")
        if tag == "e":
            if len(parts) != 3:
                raise ParseError(lineno, "edge line must be 'e <u> <v>'")
            u, v = vid(parts[1], lineno), vid(parts[2], lineno)
            if u == v:
                raise ParseError(lineno, f"self-loop at vertex {parts[1]}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ParseError(lineno, f"duplicate edge {parts[1]} {parts[2]}")
            seen.add(key)
            edges.append(key)
        elif tag == "w" or (tag == "n" and format == "dimacs"):
            if len(parts) != 3:
                raise ParseError(lineno, "weight line must be 'w <vid> <float>'")
            v = vid(parts[1], lineno)
            try:
                x = float(parts[2])
            except ValueError:
                raise ParseError(lineno, f"bad weight {parts[2]!r}") from None
            if not (x >= 0.0) or math.isinf(x):
                raise ParseError(lineno, f"weight must be finite and >= 0, got {parts[2]}")
            weights[v] = x
        else:
            raise ParseError(lineno, f"unknown line type {tag!r}")
    if n < 0:
        raise ParseError(0, "missing header line")
    if declared_m != len(edges):
        raise ParseError(0, f"header declares {declared_m} edges, found {len(edges)}")
    return WeightedGraph(n, edges, weights)


def read_graph(path: str, format: str | None = None) -> WeightedGraph:
    if format is None:
        format = "dimacs" if path.endswith((".dimacs", ".col", ".gr")) else "edge-list"
    with open(path, encoding="utf-8") as fh:
        return load_graph(fh, format)


def dump_graph(g: WeightedGraph, out: IO[str], format: str = "edge-list") -> None:
    base = 1 if format == "dimacs" else 0
    out.write(f"p {g.n} {g.m}\n")
    for v, x in enumerate(g.weight):
        if x != 1.0:
            out.write(f"w {v + base} {x!r}\n")
    for u, v in g.edges():
        out.write(f"e {u + base} {v + base}\n")


def graph_to_text(g: WeightedGraph, format: str = "edge-list") -> str:
    buf = io.StringIO()
    dump_graph(g, buf, format)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# components and layered BFS

def components(g: WeightedGraph, within: Iterable[int] | None = None
               ) -> list[tuple[set[int], float]]:
    """Connected components of ``G[within]`` with their total weights.

    Components are listed by ascending smallest vertex.
    """
    if within is None:
        inside = bytearray(b"\x01") * g.n
        order: Iterable[int] = range(g.n)
    else:
        inside = bytearray(g.n)
        order = sorted(set(within))
        for v in order:
            inside[v] = 1
    adj = g.adj
    w = g.weight
    out = []
    for s in order:
        if inside[s] != 1:
            continue
        inside[s] = 2
        comp = [s]
        i = 0
        while i < len(comp):
            for x in adj[comp[i]]:
                if inside[x] == 1:
                    inside[x] = 2
                    comp.append(x)
            i += 1
        out.append((set(comp), math.fsum(w[v] for v in comp)))
    return out


class BfsExhausted(Exception):
    """No further BFS layer exists."""


@dataclass
class LayeredBfs:
    """State of a layer-by-layer BFS inside ``G[restricted_to]``."""

    source: int
    restricted_to: set[int] | None = None
    layers: list[set[int]] = field(default_factory=list)
    explored: set[int] = field(default_factory=set)

    def __post_init__(self):
        if not self.layers:
            self.layers.append({self.source})
            self.explored.add(self.source)


def bfs_next_layer(state: LayeredBfs, g: WeightedGraph) -> set[int]:
    """Compute, record and return the next layer of ``state``."""
    last = state.layers[-1]
    if not last:
        raise BfsExhausted
    allowed = state.restricted_to
    explored = state.explored
    nxt: set[int] = set()
    for v in last:
        for x in g.adj[v]:
            if x not in explored and (allowed is None or x in allowed):
                nxt.add(x)
    if not nxt:
        raise BfsExhausted
    explored |= nxt
    state.layers.append(nxt)
    return nxt


def bfs_distances(g: WeightedGraph, source: int,
                  allowed: bytearray | None = None) -> list[int]:
    """Hop distances from ``source`` (-1 when unreachable)."""
    dist = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    adj = g.adj
    while queue:
        v = queue.popleft()
        dv = dist[v] + 1
        for x in adj[v]:
            if dist[x] < 0 and (allowed is None or allowed[x]):
                dist[x] = dv
                queue.append(x)
    return dist


# ---------------------------------------------------------------------------
# sparsity and degree filtering

def sparsity_coefficient(h: int, c_sp: float = 8.0) -> float:
    return c_sp * h * math.sqrt(math.log2(max(h, 2)))


def sparsity_gate(g: WeightedGraph, p: ProblemParams, c_sp: float = 8.0) -> bool:
    """True (pass) unless ``m`` exceeds ``sparsity_coefficient(h) * n``."""
    return g.m <= sparsity_coefficient(p.h, c_sp) * g.n


def split_high_degree(g: WeightedGraph, delta: int
                      ) -> tuple[list[int], WeightedGraph, list[int]]:
    """Remove vertices of degree > ``delta``.

    Returns ``(v_delta, g_low, orig)`` where ``g_low`` is the remaining
    induced subgraph and ``orig`` maps its ids back to ``g``.
    """
    if delta < 1:
        raise ValueError("delta must be >= 1")
    high = [v for v in range(g.n) if len(g.adj[v]) > delta]
    hs = set(high)
    sub, orig = g.induced(v for v in range(g.n) if v not in hs)
    return high, sub, orig


class EdgeMarks:
    """Per-edge boolean scratch flags, cleared in O(1) by bumping a generation."""

    __slots__ = ("_stamp", "_gen")

    def __init__(self, m: int):
        self._stamp = [0] * m
        self._gen = 1

    def clear(self) -> None:
        self._gen += 1

    def mark(self, eid: int) -> None:
        self._stamp[eid] = self._gen

    def is_marked(self, eid: int) -> bool:
        return self._stamp[eid] == self._gen
