from __future__ import annotations

import heapq
import io
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from shallowsep import generators as gen
from shallowsep.clustering import (ActiveSet, Budgets, Cluster, Clustering,
                                   DynamicDecomposition, IllegalTransition, RegimeError,
                                   build_nested, build_r_clustering, build_spanner,
                                   dense_distance_graph, dump_clustering, load_clustering,
                                   restrict_ddg)
from shallowsep.clustering.algo2 import run_algorithm2
from shallowsep.clustering.clusters import envelope_sums
from shallowsep.clustering.spanner import size_budget
from shallowsep.graph import ProblemParams, WeightedGraph, components
from shallowsep.outcome import MinorCertificate, Separator, outcome_to_json
from shallowsep.separator import run_algorithm1
from shallowsep.verify import (exact_distance_oracle, interior_forbidden_distances,
                               verify_clustering, verify_outcome)

P5 = ProblemParams(5, 4, 1.0)


def nested_for(g: WeightedGraph, r: int, seed: int = 0) -> Clustering:
    cl = build_nested(g, ProblemParams(5, r, 1.0), r, seed=seed, check=False)
    assert isinstance(cl, Clustering)
    return cl


def hand_clustering() -> Clustering:
    """Path 0-1-2-3-4 split at 2, each half split into its two edges."""
    g = gen.path(5)
    cs = {
        0: Cluster(0, [0, 1], [0, 1, 2], {2}, 1, None, [2, 3]),
        1: Cluster(1, [2, 3], [2, 3, 4], {2}, 1, None, [4, 5]),
        2: Cluster(2, [0], [0, 1], {1}, 2, 0, []),
        3: Cluster(3, [1], [1, 2], {1, 2}, 2, 0, []),
        4: Cluster(4, [2], [2, 3], {2, 3}, 2, 1, []),
        5: Cluster(5, [3], [3, 4], {3}, 2, 1, []),
    }
    return Clustering(g, cs, [0, 1], 3, nested=True)


# r-clustering ---------------------------------------------------------------

def test_small_graph_single_cluster():
    g = gen.path(6)
    cl = build_r_clustering(g, P5, 10, check=False)
    assert len(cl.clusters) == 1 and not cl.level1()[0].boundary


def test_path100_r10():
    g = gen.path(100)
    cl = build_r_clustering(g, ProblemParams(5, 10), 10)
    assert verify_clustering(g, cl.as_dicts(), r=10).ok
    assert all(len(c.boundary) <= 2 for c in cl)
    assert sum(len(c.boundary) for c in cl) <= 2 * len(cl.clusters)


def test_grid32_r64_within_budgets():
    g = gen.grid(32, 32)
    b = Budgets()
    cl = build_r_clustering(g, ProblemParams(5, 64), 64, budgets=b)
    rep = verify_clustering(g, cl.as_dicts(), r=64, per_cluster_budget=b.per_cluster(64, g.n),
                            total_budget=b.total(64, g.n))
    assert rep.ok, rep
    assert cl.diagnostics["within_budget"]
    sums = envelope_sums(cl)
    envelope = b.slack * g.n * math.sqrt(64) * math.log2(g.n + 1) ** 2
    assert sums["size_boundary"] <= envelope and sums["boundary_cubed"] <= envelope


def test_regime_violation():
    with pytest.raises(RegimeError):
        build_r_clustering(gen.path(1000), P5, 5)


def test_clustering_reports_minor():
    g = gen.expander(400, 6, 1)
    out = build_r_clustering(g, ProblemParams(5, 30, 1.0), 30)
    assert isinstance(out, MinorCertificate)
    assert verify_outcome(g, outcome_to_json(out), 5).ok


def test_dump_load_roundtrip():
    g = gen.grid(8, 8)
    cl = nested_for(g, 8)
    buf = io.StringIO()
    dump_clustering(cl, buf)
    back = load_clustering(g, io.StringIO(buf.getvalue()))
    assert back.to_json() == cl.to_json()
    with pytest.raises(ValueError):
        load_clustering(g, io.StringIO('{"version": 99}'))


# nested clustering -------------------------------------------------------------

def test_single_edge_graph():
    g = gen.path(2)
    cl = nested_for(g, 2)
    assert len(cl.clusters) == 1 and cl.level1()[0].edges == [0]


def test_path8_nesting():
    g = gen.path(8)
    cl = nested_for(g, 8)
    assert verify_clustering(g, cl.as_dicts(), nested=True).ok
    # each split leaves pieces of at most 2/3 of the vertices
    assert cl.diagnostics["levels"] <= 1 + math.ceil(math.log(8, 1.5)) + 1
    leaves = [c for c in cl if not c.children]
    assert sorted(e for c in leaves for e in c.edges) == list(range(7))
    assert all(len(c.edges) == 1 for c in leaves)


@pytest.mark.parametrize("w,h,seed", [(10, 10, 0), (16, 9, 1), (20, 20, 2)])
def test_nested_grids_decrease(w, h, seed):
    g = gen.grid(w, h)
    cl = nested_for(g, 16, seed)
    assert verify_clustering(g, cl.as_dicts(), r=16, nested=True).ok
    levels: dict[int, list[int]] = {}
    for c in cl:
        levels.setdefault(c.level, []).append(len(c.edges))
    means = [sum(v) / len(v) for _, v in sorted(levels.items())]
    assert all(b < a for a, b in zip(means, means[1:]))


# dense distance graphs ---------------------------------------------------------

def test_ddg_path_examples():
    d = dense_distance_graph([(0, 1), (1, 2)], [0, 2])
    assert d.weight(0, 2) == 2 and d.unpack(0, 2) == [0, 1, 2]
    d2 = dense_distance_graph([(0, 1), (1, 2)], [0, 1, 2])
    assert d2.weight(0, 1) == 1 and d2.weight(1, 2) == 1 and d2.weight(0, 2) == math.inf
    assert d2.weight(1, 1) == 0


def test_ddg_grid_side():
    g = gen.grid(4, 4)
    side = [0, 1, 2, 3]
    d = dense_distance_graph(g.edges(), side)
    for a in side:
        ref = interior_forbidden_distances(range(16), g.edges(), side, a)
        for b in side:
            assert d.weight(a, b) == ref[b]


def random_cluster(rng: random.Random, n: int) -> tuple[list[tuple[int, int]], list[int]]:
    g = gen.gnm(n, min(n * (n - 1) // 2, rng.randint(n - 1, 3 * n)), rng.randrange(10**6))
    comp = max(components(g), key=lambda c: len(c[0]))[0]
    edges = [(a, b) for a, b in g.edges() if a in comp]
    verts = sorted(comp)
    boundary = rng.sample(verts, rng.randint(1, max(1, min(len(verts), 12))))
    return edges, boundary


@given(st.integers(0, 10**6))
def test_ddg_matches_forbidden_bfs(seed):
    rng = random.Random(seed)
    edges, boundary = random_cluster(rng, rng.randint(2, 40))
    verts = {x for e in edges for x in e} | set(boundary)
    d = dense_distance_graph(edges, boundary)
    eset = {(min(a, b), max(a, b)) for a, b in edges}
    for a in boundary:
        ref = interior_forbidden_distances(verts, edges, boundary, a)
        for b in boundary:
            assert d.weight(a, b) == ref[b]
            if a != b and ref[b] < math.inf:
                path = d.unpack(a, b)
                assert len(path) - 1 == ref[b]
                assert all((min(x, y), max(x, y)) in eset for x, y in zip(path, path[1:]))
                assert not set(path[1:-1]) & set(boundary)


@given(st.integers(0, 10**6))
def test_restrict_equals_recompute(seed):
    rng = random.Random(seed)
    edges, boundary = random_cluster(rng, rng.randint(2, 40))
    full = dense_distance_graph(edges, boundary)
    keep = [b for b in boundary if rng.random() < 0.5]
    sub = restrict_ddg(full, keep)
    verts = {x for e in edges for x in e} | set(boundary)
    assert sub.vertices == sorted(keep)
    for a in keep:
        ref = interior_forbidden_distances(verts, edges, boundary, a)
        for b in keep:
            assert sub.weight(a, b) == ref[b]
    assert restrict_ddg(full, boundary).weights == full.weights
    assert restrict_ddg(full, []).weights == {}
    with pytest.raises(ValueError):
        restrict_ddg(full, [10**6])


# spanners ----------------------------------------------------------------------

def apsp(vertices, edges) -> dict[int, dict[int, float]]:
    adj: dict[int, list[tuple[int, float]]] = {v: [] for v in vertices}
    for a, b, w in edges:
        adj[a].append((b, w))
        adj[b].append((a, w))
    out = {}
    for s in vertices:
        dist = {s: 0.0}
        heap = [(0.0, s)]
        while heap:
            d, x = heapq.heappop(heap)
            if d > dist[x]:
                continue
            for y, w in adj[x]:
                if d + w < dist.get(y, math.inf):
                    dist[y] = d + w
                    heapq.heappush(heap, (d + w, y))
        out[s] = dist
    return out


def test_spanner_tree_is_kept():
    edges = [(0, 1, 3.0), (1, 2, 1.0), (1, 3, 2.0), (3, 4, 5.0)]
    sp = build_spanner(edges, 1 / 3)
    assert sorted(sp.edges) == sorted(edges)


def test_spanner_eps1_exact():
    rng = random.Random(3)
    g = gen.gnm(30, 90, 3)
    edges = [(a, b, float(rng.randint(1, 9))) for a, b in g.edges()]
    sp = build_spanner(edges, 1.0)
    assert apsp(range(30), sp.edges) == apsp(range(30), edges)


def test_spanner_k8_stretch3():
    edges = [(a, b, 1.0) for a, b in gen.complete(8).edges()]
    sp = build_spanner(edges, 1 / 3)
    dist = apsp(range(8), sp.edges)
    assert sp.stretch == 3.0
    assert all(dist[a][b] <= 3 for a in range(8) for b in range(8))
    assert len(sp.edges) < len(edges)


@given(st.integers(0, 10**6), st.sampled_from([1.0, 0.5, 1 / 3, 0.4]))
def test_spanner_contract(seed, eps):
    rng = random.Random(seed)
    n = rng.randint(2, 40)
    g = gen.gnm(n, rng.randint(0, min(n * (n - 1) // 2, 4 * n)), seed)
    edges = [(a, b, float(rng.randint(0, 20))) for a, b in g.edges()]
    sp = build_spanner(edges, eps, range(n))
    assert set(sp.edges) <= set(edges)
    orig, span = apsp(range(n), edges), apsp(range(n), sp.edges)
    for a in range(n):
        for b, d in orig[a].items():
            assert span[a][b] <= sp.stretch * d
    assert len(sp.edges) <= size_budget(n, eps)


def test_spanner_rejects_bad_input():
    with pytest.raises(ValueError):
        build_spanner([(0, 1, -1.0)], 0.5)
    with pytest.raises(ValueError):
        build_spanner([(0, 1, 1.0)], 0.0)


# active set and X-clusters -------------------------------------------------------

def test_active_set_transitions():
    a = ActiveSet(3)
    a.activate(0)
    with pytest.raises(IllegalTransition):
        a.activate(0)
    a.deactivate(0)
    with pytest.raises(IllegalTransition):
        a.activate(0)
    with pytest.raises(IllegalTransition):
        a.deactivate(1)
    assert len(a) == 0


def test_interior_activation_leaves_xclusters_alone():
    dd = DynamicDecomposition(hand_clustering())
    before = {cid: dd.xstate(cid) for cid in dd.cl.clusters}
    count = dd.recomputations
    dd.activate(0)           # interior of clusters 0 and 2
    for cid in dd.cl.clusters:
        assert dd.xstate(cid) is before[cid]
    assert dd.recomputations == count


def test_pendant_cluster_boundary_activation():
    dd = DynamicDecomposition(hand_clustering())
    dd.activate(2)
    st0 = dd.xstate(0)
    assert st0.xclusters == []
    assert [sorted(p.vertices) for p in st0.inner] == [[0, 1]]


def test_activate_deactivate_cycle_restores_weights():
    g = gen.grid(12, 12)
    dd = DynamicDecomposition(nested_for(g, 12))
    initial = {cid: [p.weight for p in dd.xstate(cid).xclusters] for cid in dd.cl.clusters}
    for v in (13, 50, 77):
        dd.activate(v)
    for v in (13, 50, 77):
        dd.deactivate(v)
    assert {cid: [p.weight for p in dd.xstate(cid).xclusters] for cid in dd.cl.clusters} == initial


def test_refine_cx_examples():
    cl = hand_clustering()
    dd = DynamicDecomposition(cl)
    assert dd.refine_cx() == [0, 1]
    dd.activate(2)           # a level-1 boundary vertex
    assert dd.refine_cx() == [0, 1]
    dd.activate(1)           # interior of cluster 0
    assert dd.refine_cx() == [2, 3, 1]


def test_refine_cx_puts_x_on_boundaries():
    g = gen.grid(16, 16)
    dd = DynamicDecomposition(nested_for(g, 16))
    rng = random.Random(0)
    for v in rng.sample(range(g.n), 30):
        dd.activate(v)
    cx = dd.refine_cx()
    bset = dd.cx_boundary()
    for v in dd.active.members:
        owners = [c for c in cx if v in dd.cl.clusters[c].vertices]
        on_boundary = v in bset
        leaf = all(not dd.cl.clusters[c].children for c in owners)
        assert on_boundary or leaf
    # refined clusters still partition the edges
    eids = sorted(e for c in cx for e in dd.cl.clusters[c].edges)
    assert eids == list(range(g.m))


def test_component_weight_examples():
    g = gen.grid(6, 6)
    dd = DynamicDecomposition(nested_for(g, 6))
    comps = dd.component_weights()
    assert len(comps) == 1 and comps[0].weight == 36
    p = gen.path(9)
    dd = DynamicDecomposition(nested_for(p, 4))
    dd.activate(4)
    got = sorted((sorted(c.vertices()), c.weight) for c in dd.component_weights())
    assert got == [([0, 1, 2, 3], 4), ([5, 6, 7, 8], 4)]


@given(st.integers(0, 10**6))
def test_component_weights_match_components(seed):
    rng = random.Random(seed)
    fam = rng.randrange(3)
    if fam == 0:
        g = gen.grid(rng.randint(3, 9), rng.randint(3, 9))
    elif fam == 1:
        n = rng.randint(10, 60)
        g = gen.gnm(n, rng.randint(0, n + n // 3), seed)
    else:
        g = gen.cycle(rng.randint(3, 60))
    g = g.with_weights([float(rng.randint(0, 4)) + 0.25 * rng.randint(0, 3) for _ in range(g.n)])
    cl = build_nested(g, ProblemParams(8, 4, 1.0), 4, seed=seed, check=False)
    if not isinstance(cl, Clustering):
        return
    dd = DynamicDecomposition(cl)
    order = list(range(g.n))
    rng.shuffle(order)
    live: list[int] = []
    for _ in range(min(25, g.n)):
        if live and rng.random() < 0.3:
            dd.deactivate(live.pop(rng.randrange(len(live))))
        else:
            v = order.pop()
            dd.activate(v)
            live.append(v)
        rest = [v for v in range(g.n) if v not in dd.active]
        ref = sorted((min(c), Fraction(w)) for c, w in components(g, rest))
        got = sorted((min(c.vertices()), c.weight) for c in dd.component_weights())
        assert got == ref


@pytest.mark.parametrize("eps", [1.0, 0.5, 1 / 3])
def test_sx_distances_within_stretch(eps):
    g = gen.grid(10, 10)
    dd = DynamicDecomposition(nested_for(g, 10), eps)
    rng = random.Random(1)
    for v in rng.sample(range(g.n), 12):
        dd.activate(v)
    t = 1 / eps
    exact = exact_distance_oracle(g, dd.active.members)
    passive = sorted(b for b in dd.cx_boundary() if b not in dd.active)
    adj = dd.sx_adjacency()
    for a in passive[:15]:
        dist = dd.sx_distances(a, adj)
        for b in passive:
            e = exact(a, b)
            got = dist.get(b, math.inf)
            assert got >= e
            if e < math.inf:
                assert got <= t * e + 1e-9


# Algorithm 2 -----------------------------------------------------------------------

def test_algo2_regime_gate():
    with pytest.raises(RegimeError):
        run_algorithm2(gen.grid(10, 10), ProblemParams(5, 11, 1.0))


def test_algo2_k5():
    # unit weights: the loop stops at balance before any minor is needed
    g = gen.complete(5)
    out = run_algorithm2(g, ProblemParams(5, 2, 1.0))
    assert verify_outcome(g, outcome_to_json(out), 5).ok


@pytest.mark.parametrize("eps", [1.0, 0.5])
def test_algo2_grid_and_cross_validation(eps):
    g = gen.grid(30, 30)
    p = ProblemParams(5, 10, eps)
    out2 = run_algorithm2(g, p, debug=True)
    out1 = run_algorithm1(g, p)
    assert isinstance(out2, Separator) and isinstance(out1, Separator)
    assert verify_outcome(g, outcome_to_json(out2), 5).ok
    assert verify_outcome(g, outcome_to_json(out1), 5).ok
    assert out2.stats.extra["max_active"] <= out2.stats.extra["active_bound"]


def test_algo2_forces_cuts():
    g = gen.grid(120, 8)
    out = run_algorithm2(g, ProblemParams(5, 25, 1.0), debug=True)
    assert verify_outcome(g, outcome_to_json(out), 5).ok
