from __future__ import annotations

import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from shallowsep import generators as gen
from shallowsep.algo3 import (EVICTED, INSIDE, MiniClusterTreeFinder, build_mini_clusters,
                              run_algorithm3, stretch_params)
from shallowsep.clustering import Budgets, Cluster, Clustering, build_r_clustering
from shallowsep.graph import ProblemParams, WeightedGraph, bfs_distances
from shallowsep.outcome import MinorCertificate, Rejected, Separator, outcome_to_json
from shallowsep.separator import GenericRun, InvariantViolation
from shallowsep.verify import verify_outcome


def single_cluster(g: WeightedGraph, boundary: set[int]) -> Clustering:
    c = Cluster(0, list(range(g.m)), list(range(g.n)), set(boundary), 1, None, [])
    return Clustering(g, {0: c}, [0], max(g.m, 1))


def bound_finder(g: WeightedGraph, boundary: set[int], eps: float = 1.0
                 ) -> tuple[MiniClusterTreeFinder, GenericRun]:
    minis = build_mini_clusters(g, single_cluster(g, boundary))
    finder = MiniClusterTreeFinder(minis, eps, Budgets())
    run = GenericRun(g, ProblemParams(3, 2, eps), finder)
    return finder, run


# construction ---------------------------------------------------------------

def test_path_axb_single_region():
    minis = build_mini_clusters(gen.path(3), single_cluster(gen.path(3), {0, 2}))
    assert len(minis) == 1
    mc = minis[0]
    assert mc.kind == "C1" and mc.pair == (0, 2) and mc.interior == [1]


def test_boundary_edge_is_c2():
    g = gen.path(3)
    minis = build_mini_clusters(g, single_cluster(g, {0, 1}))
    kinds = sorted((mc.kind, tuple(mc.edges)) for mc in minis)
    assert kinds == [("C1", (1,)), ("C2", (0,))]


def test_shorter_region_wins_pair():
    # 0-1-2 is shorter than 0-3-4-2
    g = WeightedGraph(5, [(0, 1), (1, 2), (0, 3), (3, 4), (4, 2)])
    minis = build_mini_clusters(g, single_cluster(g, {0, 2}))
    by_interior = {tuple(mc.interior): mc for mc in minis}
    assert by_interior[(1,)].pairs == [(0, 2)]
    assert by_interior[(3, 4)].pairs == []


def test_tie_goes_to_smaller_interior_id():
    g = gen.cycle(6)
    minis = build_mini_clusters(g, single_cluster(g, {0, 3}))
    by_interior = {tuple(mc.interior): mc for mc in minis}
    assert by_interior[(1, 2)].pairs == [(0, 3)]
    assert by_interior[(4, 5)].pairs == []


def random_clustered(seed: int) -> tuple[WeightedGraph, Clustering]:
    rng = random.Random(seed)
    if rng.random() < 0.5:
        g = gen.grid(rng.randint(4, 14), rng.randint(4, 14))
    else:
        n = rng.randint(20, 120)
        g = gen.gnm(n, rng.randint(n, 2 * n), seed)
    r = max(5, int(2 * math.log(g.n)) + 1)
    cl = build_r_clustering(g, ProblemParams(8, r, 1.0), r, seed=seed, check=False)
    return g, cl


@given(st.integers(0, 10**6))
def test_mini_clusters_partition_edges(seed):
    g, cl = random_clustered(seed)
    if not isinstance(cl, Clustering):
        return
    minis = build_mini_clusters(g, cl)
    assert sorted(e for mc in minis for e in mc.edges) == list(range(g.m))
    for c in cl:
        c1 = [mc for mc in minis if mc.origin == c.id and mc.kind == "C1"]
        for i, a in enumerate(c1):
            for b in c1[i + 1:]:
                assert set(a.vertices) & set(b.vertices) <= c.boundary
        owners: dict[tuple[int, int], int] = {}
        for mc in c1:
            for pair in mc.pairs:
                assert pair not in owners
                owners[pair] = mc.id


def region_distance(g: WeightedGraph, mc, a: int, b: int) -> float:
    verts = sorted(mc.vertices)
    idx = {v: i for i, v in enumerate(verts)}
    h = WeightedGraph(len(verts), [(idx[g.eu[e]], idx[g.ev[e]]) for e in mc.edges])
    d = bfs_distances(h, idx[a])[idx[b]]
    return math.inf if d < 0 else d


@given(st.integers(0, 10**6))
def test_selection_is_minimal(seed):
    g, cl = random_clustered(seed)
    if not isinstance(cl, Clustering):
        return
    minis = build_mini_clusters(g, cl)
    for c in cl:
        c1 = [mc for mc in minis if mc.origin == c.id and mc.kind == "C1"]
        for mc in c1:
            for a, b in mc.pairs:
                mine = region_distance(g, mc, a, b)
                for other in c1:
                    if a in other.boundary and b in other.boundary:
                        theirs = region_distance(g, other, a, b)
                        assert (mine, mc.interior[0]) <= (theirs, other.interior[0])


def test_stretch_params():
    assert stretch_params(1.0) == (6.0, 3)
    assert stretch_params(0.5) == (12.0, 6)
    assert stretch_params(2.0) == (3.0, 2)
    with pytest.raises(ValueError):
        stretch_params(3.0)


# tree expansion and eviction ----------------------------------------------------

def test_expand_tree_path_region():
    # region a-x-y-b with a=0, b=3
    g = gen.path(4)
    finder, _ = bound_finder(g, {0, 3})
    parent = {0: -1}
    touched = finder.expand_tree(parent)
    assert set(parent) == {0, 1, 2} and touched == [0]


def test_expand_tree_untouched():
    g = WeightedGraph(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
    finder, _ = bound_finder(g, {2})
    parent = {5: -1}
    finder.expand_tree(parent)
    # the boundary-free region holding 5 is absorbed whole
    assert parent == {5: -1, 4: 5, 3: 4}


def test_expand_tree_disjoint_from_boundaries():
    g = WeightedGraph(5, [(0, 1), (1, 2), (3, 4)])
    finder, _ = bound_finder(g, {0, 2})
    for mc in finder.minis:
        if 3 in mc.vertices:
            mc.state = EVICTED
    parent = {3: -1, 4: 3}
    assert finder.expand_tree(parent) == [] and parent == {3: -1, 4: 3}


def test_double_eviction_and_c2_deletions():
    g = gen.path(3)
    finder, run = bound_finder(g, {0, 1})
    c2 = next(mc for mc in finder.minis if mc.kind == "C2")
    finder.evict(c2.id)
    assert run.stats.oracle_deletions == len(c2.spanner_eids) * len(finder.oracles)
    assert len(c2.spanner_eids) <= 1
    with pytest.raises(InvariantViolation):
        finder.evict(c2.id)


def test_corridor_closes_after_eviction():
    # the only route from 0 to 4 runs through the region with interior {2}
    g = gen.path(5)
    finder, _ = bound_finder(g, {0, 1, 3, 4})
    o = finder.oracles[0]
    assert o.query_nearest(1, {3}).value <= finder.d3
    mid = next(mc.id for mc in finder.minis if mc.interior == [2])
    finder.evict(mid)
    assert o.query_nearest(1, {3}).value > finder.d3


# full runs -------------------------------------------------------------------------

@pytest.mark.parametrize("w,h,ell,eps", [(40, 40, 10, 1.0), (40, 40, 10, 0.5), (48, 48, 12, 1.0)])
def test_grid_runs_with_membership_checks(w, h, ell, eps):
    g = gen.grid(w, h)
    out = run_algorithm3(g, ProblemParams(5, ell, eps), debug=True)
    assert isinstance(out, Separator)
    assert out.stats.extra["high_degree"] == 0
    assert verify_outcome(g, outcome_to_json(out), 5).ok


def test_high_degree_vertices_join_separator():
    g = gen.grid(40, 40)
    hub = g.n
    edges = list(g.edges()) + [(hub, v) for v in range(0, g.n, 37)]
    g2 = WeightedGraph(g.n + 1, edges)
    out = run_algorithm3(g2, ProblemParams(5, 10, 1.0))
    assert isinstance(out, Separator) and hub in out.vertices
    assert out.stats.extra["high_degree"] >= 1
    assert verify_outcome(g2, outcome_to_json(out), 5).ok


def test_dense_input_rejected():
    out = run_algorithm3(gen.complete(120), ProblemParams(3, 6, 1.0))
    assert isinstance(out, Rejected) and out.reason == "dense"


def test_cycle_gives_triangle_certificate():
    g = gen.cycle(40)
    out = run_algorithm3(g, ProblemParams(3, 4, 1.0))
    assert isinstance(out, MinorCertificate)
    assert verify_outcome(g, outcome_to_json(out), 3).ok


@pytest.mark.parametrize("length,ell", [(5, 3), (100, 8)])
def test_k6_blowup_outcome_is_valid(length, ell):
    # unit weights: balance is reached before a minor has to be shown
    g = gen.blowup(6, length)
    out = run_algorithm3(g, ProblemParams(6, ell, 1.0))
    assert isinstance(out, (Separator, MinorCertificate, Rejected))
    if not isinstance(out, Rejected):
        assert verify_outcome(g, outcome_to_json(out), 6).ok


def test_determinism():
    g = gen.gnm(300, 600, 4)
    a = outcome_to_json(run_algorithm3(g, ProblemParams(5, 6, 1.0), seed=2))
    b = outcome_to_json(run_algorithm3(g, ProblemParams(5, 6, 1.0), seed=2))
    a["stats"].pop("wall_ms"), b["stats"].pop("wall_ms")
    assert a == b
