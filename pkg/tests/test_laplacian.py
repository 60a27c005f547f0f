from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import dense_green, dense_resistance, inclusion_by_enumeration, spanning_trees
from strategies import small_graphs

from rwlab import graphs as G
from rwlab import laplacian as lap


def test_line_green_and_resistance():
    F = G.free_window("line", 5)
    # path 0-1-2 absorbed at 0: visits to 1 from 1 number 2 on average
    F2 = G.graph_from_edges([(0, 1), (1, 2)])
    assert lap.green_column(F2, 0, 1, exact=True)[F2.idx(1)] == 2
    assert lap.effective_resistance(F, 0, 5, exact=True) == 5


def test_hitting_distribution_gamblers_ruin():
    F = G.free_window("line", 2)
    h = lap.hitting_distribution(F, 1, [-2, 2], exact=True)
    assert h[-2] == Fraction(1, 4) and h[2] == Fraction(3, 4)


def test_cycle_resistance_and_trees():
    C4 = G.graph_from_edges([(0, 1), (1, 2), (2, 3), (3, 0)])
    assert lap.effective_resistance(C4, 0, 1, exact=True) == Fraction(3, 4)
    assert lap.spanning_tree_count(C4) == 4
    assert lap.forest_inclusion_probability(C4, [(0, 1)]) == Fraction(3, 4)
    assert lap.forest_inclusion_probability(C4, [(0, 1), (1, 2)]) == Fraction(1, 2)


def test_known_tree_counts():
    K4 = G.graph_from_edges([(i, j) for i in range(4) for j in range(i + 1, 4)])
    assert lap.spanning_tree_count(K4) == 16
    assert lap.spanning_tree_count(G.free_window("ladder", 1)) == 15


def test_contract_rejects_cycles_and_non_edges():
    C4 = G.graph_from_edges([(0, 1), (1, 2), (2, 3), (3, 0)])
    with pytest.raises(ValueError):
        lap.contract(C4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    with pytest.raises(ValueError):
        lap.contract(C4, [(0, 2)])


def test_stretched_path_inclusion_below_bound():
    # N=3, wired at r=6, path of the k=3 stretch
    F = G.wired_truncation("stretched_line", {"stretch": 3}, 6)
    p = G._stretch_path(3)
    P = lap.forest_inclusion_probability(F, list(zip(p, p[1:])))
    assert P == Fraction(13, 54)
    assert P <= Fraction(6, 14)


def test_wired_grid_neighbour_resistance_near_half():
    F = G.wired_truncation("grid2d", {}, 30)
    assert abs(lap.effective_resistance(F, (0, 0), (1, 0)) - 0.5) < 1e-3


def test_exact_and_float_agree():
    F = G.wired_truncation("grid2d", {}, 4)
    ex = lap.green_column(F, G.BOUNDARY, (0, 0), exact=True)
    fl = lap.green_column(F, G.BOUNDARY, (0, 0), exact=False)
    assert np.allclose(ex.astype(float), fl, atol=1e-12)


@given(small_graphs(max_n=6, max_extra=3))
def test_tree_count_matches_enumeration(F):
    _, trees = spanning_trees(F)
    assert lap.spanning_tree_count(F) == len(trees)


@given(small_graphs(min_n=3, max_n=5, max_extra=3), st.data())
def test_inclusion_matches_enumeration(F, data):
    u, v, _ = data.draw(st.sampled_from(list(F.edges)))
    assert lap.forest_inclusion_probability(F, [(u, v)]) == inclusion_by_enumeration(F, [(u, v)])


@given(small_graphs(), st.data())
def test_green_matches_dense_inverse(F, data):
    z = data.draw(st.sampled_from(F.vertices))
    y = data.draw(st.sampled_from([v for v in F.vertices if v != z]))
    keep, Ginv = dense_green(F, z)
    col = lap.green_column(F, z, y)
    j = keep.index(F.idx(y))
    for a, i in enumerate(keep):
        assert abs(col[i] - Ginv[a, j]) < 1e-9


@given(small_graphs(), st.data())
def test_green_symmetry_and_resistance(F, data):
    z, x, y = (data.draw(st.sampled_from(F.vertices)) for _ in range(3))
    if z in (x, y):
        return
    gx = lap.green_column(F, z, y, exact=True)[F.idx(x)]
    gy = lap.green_column(F, z, x, exact=True)[F.idx(y)]
    # reversibility: G_z(x, y) / deg(y) = G_z(y, x) / deg(x)
    assert gx * F.deg(x) == gy * F.deg(y)
    R = lap.effective_resistance(F, x, z, exact=True)
    assert R == lap.green_column(F, z, x, exact=True)[F.idx(x)] / F.deg(x)
    assert abs(float(R) - dense_resistance(F, x, z)) < 1e-9


@given(small_graphs(min_n=3), st.data())
def test_resistance_is_a_metric(F, data):
    x, y, z = (data.draw(st.sampled_from(F.vertices)) for _ in range(3))
    R = lambda a, b: lap.effective_resistance(F, a, b, exact=True) if a != b else 0
    assert R(x, y) == R(y, x)
    assert R(x, z) <= R(x, y) + R(y, z)


@given(small_graphs(min_n=3), st.data())
def test_hitting_rows_are_distributions(F, data):
    B = data.draw(st.lists(st.sampled_from(F.vertices), min_size=1, max_size=3, unique=True))
    targets, H = lap.hitting_matrix(F, B, exact=True)
    assert all(sum(row) == 1 for row in H)
    for j, b in enumerate(targets):
        assert H[F.idx(b), j] == 1
    # harmonic off B
    f = H[:, 0]
    Lf = lap.apply_laplacian(F, f)
    for v in F.vertices:
        if v not in B:
            assert Lf[F.idx(v)] == 0
