"""Deterministic graph families used by the CLI, the tests and the benchmarks."""

from __future__ import annotations

import random

from .graph import WeightedGraph

FAMILIES = ("grid", "path", "cycle", "complete", "gnm", "expander", "planted", "blowup")


def grid(w: int, h: int) -> WeightedGraph:
    edges = []
    for r in range(h):
        for c in range(w):
            v = r * w + c
            if c + 1 < w:
                edges.append((v, v + 1))
            if r + 1 < h:
                edges.append((v, v + w))
    return WeightedGraph(w * h, edges)


def path(n: int) -> WeightedGraph:
    return WeightedGraph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> WeightedGraph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return WeightedGraph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(k: int) -> WeightedGraph:
    return WeightedGraph(k, [(i, j) for i in range(k) for j in range(i + 1, k)])


def gnm(n: int, m: int, seed: int) -> WeightedGraph:
    """Uniform random graph with exactly ``m`` edges."""
    cap = n * (n - 1) // 2
    if m > cap:
        raise ValueError(f"at most {cap} edges fit on {n} vertices")
    rng = random.Random(seed)
    chosen: set[tuple[int, int]] = set()
    edges = []
    while len(edges) < m:
        a, b = rng.randrange(n), rng.randrange(n)
        if a == b:
            continue
        e = (min(a, b), max(a, b))
        if e not in chosen:
            chosen.add(e)
            edges.append(e)
    return WeightedGraph(n, edges)


def expander(n: int, d: int, seed: int) -> WeightedGraph:
    """Union of ``d // 2`` random Hamiltonian cycles (max degree ``<= d``).

    Repeated edges are dropped, so a few vertices can end up below ``d``.
    """
    if n < 3:
        raise ValueError("expander needs n >= 3")
    rng = random.Random(seed)
    chosen: set[tuple[int, int]] = set()
    edges = []
    for _ in range(max(1, d // 2)):
        perm = list(range(n))
        rng.shuffle(perm)
        for i in range(n):
            a, b = perm[i], perm[(i + 1) % n]
            e = (min(a, b), max(a, b))
            if e not in chosen:
                chosen.add(e)
                edges.append(e)
    return WeightedGraph(n, edges)


def planted(host_n: int, host_m: int, h: int, seed: int) -> WeightedGraph:
    """Random host graph with a ``K_h`` planted on ``h`` random vertices."""
    g = gnm(host_n, host_m, seed)
    rng = random.Random(seed + 1)
    picks = sorted(rng.sample(range(host_n), h))
    edges = {(min(a, b), max(a, b)) for a, b in g.edges()}
    for i in range(h):
        for j in range(i + 1, h):
            edges.add((picks[i], picks[j]))
    return WeightedGraph(host_n, sorted(edges))


def blowup(h: int, length: int) -> WeightedGraph:
    """``K_h`` with every vertex replaced by a path of ``length`` vertices.

    Path ``i`` occupies ids ``i*length .. (i+1)*length - 1``.  Paths ``i`` and
    ``j`` are joined by a single edge leaving path ``i`` at position ``j`` and
    path ``j`` at position ``i`` (clamped to the path end), so contracting
    each path yields ``K_h``.
    """
    if h < 1 or length < 1:
        raise ValueError("h and length must be positive")
    edges = []
    for i in range(h):
        base = i * length
        edges.extend((base + t, base + t + 1) for t in range(length - 1))
    for i in range(h):
        for j in range(i + 1, h):
            # attach at position j on path i and position i on path j
            a = i * length + min(j, length - 1)
            b = j * length + min(i, length - 1)
            edges.append((a, b))
    return WeightedGraph(h * length, edges)


def generate(family: str, *args: int) -> WeightedGraph:
    builders = {"grid": grid, "path": path, "cycle": cycle, "complete": complete,
                "gnm": gnm, "expander": expander, "planted": planted, "blowup": blowup}
    if family not in builders:
        raise ValueError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    return builders[family](*args)
