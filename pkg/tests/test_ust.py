from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import spanning_trees
from strategies import small_graphs

from rwlab import boundary as bd
from rwlab import graphs as G
from rwlab import laplacian as lap
from rwlab import ust
from rwlab.scenarios import tree_probability, ust_tv


def test_wilson_trees_are_spanning_and_rooted():
    F = G.wired_truncation("grid2d", {}, 4)
    t = ust.wilson_finite(F, F.boundary, seed=1)
    assert t.is_spanning_tree()
    assert t.root == F.boundary and t.orientation == "toward_wired_boundary"
    assert all(t.future(v)[-1] == F.boundary for v in F.vertices)


def test_wilson_matches_matrix_tree_on_the_ladder_window():
    F = G.free_window("ladder", 1)
    succ = ust.wilson_successors(F, (0, 0), 50_000, seed=2)
    assert ust_tv(F, ust.tree_keys(F, succ)) < 0.02


@settings(max_examples=10)
@given(small_graphs(max_n=5, max_extra=2, max_mult=1), st.data())
def test_wilson_support_is_all_trees(F, data):
    root = data.draw(st.sampled_from(F.vertices))
    succ = ust.wilson_successors(F, root, 4000, seed=7)
    keys = set(ust.tree_keys(F, succ))
    edges, trees = spanning_trees(F)
    shapes = {frozenset(frozenset(edges[k]) for k in t) for t in trees}
    if len(shapes) <= 20:
        assert len(keys) == len(shapes)
    tau = lap.spanning_tree_count(F)
    assert sum(tree_probability(F, k, tau) for k in keys) <= 1


def test_edge_frequencies_follow_resistance():
    # P(e in T) = R_eff across e for unit edges
    F = G.wired_truncation("grid2d", {}, 3)
    n = 40_000
    succ = ust.wilson_successors(F, F.boundary, n, seed=5)
    keys = ust.tree_keys(F, succ)
    for u, v in [((0, 0), (1, 0)), ((1, 1), (1, 2)), ((2, 0), (3, 0))]:
        pair = tuple(sorted((F.idx(u), F.idx(v))))
        p = sum(pair in k for k in keys) / n
        R = float(lap.effective_resistance(F, u, v, exact=True))
        assert abs(p - R) <= 4 * np.sqrt(R * (1 - R) / n)


def test_rooted_at_h_on_a_wired_window_is_the_wired_tree():
    a = bd.window_kernel(bd.wired("grid2d"), (0, 0), 1)
    F = a.graph
    n = 60_000
    kh = ust.tree_keys(F, ust.wilson_h_successors(a, n, seed=3))
    kw = ust.tree_keys(F, ust.wilson_successors(F, F.boundary, n, seed=4))
    assert ust.total_variation(ust.empirical_distribution(kh), ust.empirical_distribution(kw)) < 0.03


def test_rooted_at_h_orientation_leads_to_the_pole():
    a = bd.window_kernel(bd.direction("ladder", "right"), (0, 0), 6)
    t = ust.wilson_rooted_at_h(a, seed=2)
    assert t.is_spanning_tree()
    assert t.root in a.pole
    with pytest.raises(ValueError):
        ust.wilson_h_successors(a, 1, 0, order=[(1, 0), (0, 0)])


def test_order_invariance_needs_two_orders():
    with pytest.raises(ValueError):
        ust.vertex_order_invariance_test(lambda o, n, s: [], [[0]], 10, 0)


def test_two_roots_rejected():
    F = G.free_window("line", 2)
    with pytest.raises(ValueError):
        ust.OrientedTree.from_successors(F, np.array([-1, 0, -1, 2, 3]), "toward_finite_root")


def test_spine_of_a_ladder_tree():
    a = bd.window_kernel(bd.direction("ladder", "right"), (0, 0), 20)
    t = ust.wilson_rooted_at_h(a, seed=6)
    sp = ust.spine_extract(t)
    xs = [v[0] for v in sp.vertices]
    # the trunk crosses every inner column and is a tree path
    assert set(range(-19, 20)) <= set(xs)
    assert all(t.graph.multiplicity(u, v) for u, v in zip(sp.vertices, sp.vertices[1:]))
    assert sp.vertices[sp.zero][0] == 0


def test_spine_refused_on_the_plane():
    F = G.wired_truncation("grid2d", {}, 3)
    with pytest.raises(ValueError):
        ust.spine_extract(ust.wilson_finite(F, F.boundary, 0))


def test_line_spine_profile():
    sp = ust.spine_cocycle_profile("line", ust.canonical_spine("line", 40), 10)
    assert sp.cocycle_residual < 1e-9 and sp.rerooting_residual < 1e-9
    assert [round(v, 9) for v in sp.a_r] == [max(n, 0) for n in sp.n]
    assert [round(m, 9) for m in sp.M] == list(sp.n)
    assert sp.n_plus == 1 and sp.n_minus == -1


def test_resistance_slope_on_the_line_is_one():
    rep = ust.spine_resistance_slope("line", [20, 40], 10, exact=True)
    assert rep.slopes[40] == Fraction(1) and rep.max_excess == 0


def test_past_reaches():
    nxt = np.array([-1, 0, 1, 0])
    assert ust.past_reaches(nxt, np.array([2]), 1)
    assert not ust.past_reaches(nxt, np.array([3]), 1)


def test_ends_proxy_on_line_and_grid():
    F = G.free_window("line", 5)
    parent = {v: (v + 1 if v < 5 else None) for v in F.vertices}
    t = ust.OrientedTree(F, parent, 5, "toward_finite_root")
    assert ust.ends_proxy(t) == 2
    # cutting the path at o leaves only one side reaching the window edge
    assert ust.ends_proxy(t, o=0, core={0, 1, 2, 3, 4, 5}) == 1


@given(st.dictionaries(st.integers(0, 5), st.floats(0, 1), min_size=1), st.dictionaries(st.integers(0, 5), st.floats(0, 1), min_size=1))
def test_total_variation_properties(p, q):
    sp, sq = sum(p.values()) or 1, sum(q.values()) or 1
    p = {k: v / sp for k, v in p.items()}
    q = {k: v / sq for k, v in q.items()}
    d = ust.total_variation(p, q)
    assert -1e-12 <= d <= 1 + 1e-12
    assert d == pytest.approx(ust.total_variation(q, p))
    assert ust.total_variation(p, p) == 0
