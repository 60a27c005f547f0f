from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rwlab import boundary as bd
from rwlab import graphs as G
from rwlab import laplacian as lap

LINE_R = bd.direction("line", "right")


def test_line_right_end_measure_is_point_mass():
    h = bd.harmonic_measure_limit(LINE_R, [-1, 1], exact=True)
    assert h.converged
    assert h.measure[1] == 1 and h.measure[-1] == 0


def test_line_right_kernel_is_positive_part():
    k = bd.window_kernel(LINE_R, 0, 20, exact=True)
    assert all(k(x) == max(x, 0) for x in range(-20, 20))


def test_line_left_kernel_vanishes_on_the_right_in_float_mode():
    k = bd.window_kernel(bd.direction("line", "left"), 0, 256)
    assert all(k(x) == 0.0 for x in range(0, 200))


def test_wired_grid_neighbour_value_is_a_quarter():
    k = bd.window_kernel(bd.wired("grid2d"), (0, 0), 5, exact=True)
    assert all(k(v) == Fraction(1, 4) for v in [(1, 0), (0, 1), (-1, 0), (0, -1)])


def test_ladder_rung_values_differ_but_converge():
    o = (0, 0)
    k = bd.potential_kernel_limit(bd.direction("ladder", "right"), o, [(n, s) for n in range(1, 9) for s in (0, 1)], tol=1e-10)
    assert k.converged
    assert abs(k((1, 0)) - 0.6057) < 1e-4 and abs(k((1, 1)) - 0.6830) < 1e-4
    gaps = [abs(k((n, 0)) - k((n, 1))) for n in range(1, 9)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3


def test_consistency_for_separating_pair():
    # {-2, 2} separates {-1, 1} from the right end although it does not contain it
    h = bd.harmonic_family(LINE_R, [[-1, 1], [-2, 2]], tol=1e-12, exact=True)
    assert bd.check_consistency(h, [-1, 1], [-2, 2], require_subset=False) == 0
    with pytest.raises(ValueError):
        bd.check_consistency(h, [-1, 1], [-2, 2])


@pytest.mark.slow
def test_grid_axis_and_wired_agree_on_large_windows():
    B = [(0, 0), (1, 0)]
    hw = bd.harmonic_measure_limit(bd.wired("grid2d"), B, tol=1e-3)
    ha = bd.harmonic_measure_limit(bd.vertex_sequence("grid2d", "axis"), B, tol=1e-3, cap=512)
    assert hw.converged
    # the axis sequence converges slowly; the gap at radius 512 is still within 2 tol
    assert ha.measure.sup_distance(hw.measure) <= 2e-3


def test_non_convergence_is_reported():
    h = bd.harmonic_measure_limit(bd.vertex_sequence("grid2d", "axis"), [(0, 0), (1, 0)], tol=1e-8, cap=32)
    assert not h.converged and h.radius == 32


def test_spec_validation():
    with pytest.raises(ValueError):
        bd.direction("grid2d", "right")
    with pytest.raises(ValueError):
        bd.direction("line", "up")
    with pytest.raises(ValueError):
        bd.vertex_sequence("line", "stretch_midpoints")
    with pytest.raises(ValueError):
        bd.direction("stretched_line", "right")
    with pytest.raises(ValueError):
        bd.mixture([(0.5, LINE_R), (0.6, bd.direction("line", "left"))])
    with pytest.raises(ValueError):
        bd.parse_spec("line", "north")
    assert bd.parse_spec("line", "mix:0.25").name == "mixture(0.25:right,0.75:left)"


def test_radius_schedule():
    assert bd.radius_schedule(LINE_R, 3) == [8, 16, 32, 64, 128, 256, 512]
    assert bd.radius_schedule(LINE_R, 20, cap=64) == [32, 64]
    with pytest.raises(ValueError):
        bd.radius_schedule(LINE_R, 100, cap=64)


def test_stretch_midpoint_windows_grow_the_stretch():
    spec = bd.vertex_sequence("stretched_line", "stretch_midpoints")
    F, pole = bd.window_and_pole(spec, 4)
    assert pole == {("s", 4, 8): 1}
    assert ("s", 4, 8) in F


def test_reconstruction_on_line_is_point_mass():
    a = bd.window_kernel(LINE_R, 0, 64)
    rec = bd.reconstruct_h_from_a(a, [-1, 0, 1], 10_000, seed=3)
    assert rec.measure[1] == 1.0


def test_reconstruction_round_trip_on_ladder():
    o = (0, 0)
    a = bd.window_kernel(bd.direction("ladder", "right"), o, 64)
    B = [(x, s) for x in (-1, 0, 1) for s in (0, 1)]
    rec = bd.reconstruct_h_from_a(a, B, 20_000, seed=5)
    back = bd.kernel_from_measure(a.graph, o, B, rec.last, B)
    for x in B:
        val, se = back[x]
        assert abs(val - a(x)) <= 3 * se + 1e-9


def test_reconstruction_needs_enough_samples():
    a = bd.window_kernel(LINE_R, 0, 16)
    with pytest.raises(ValueError):
        bd.reconstruct_h_from_a(a, [-1, 0, 1], 100, seed=0)


def test_hitting_matrix_identity_instances():
    tri = G.graph_from_edges([("o", 1), (1, 2), (2, "o")])
    for F, B, o in [
        (tri, ["o", 1, 2], "o"),
        (G.wired_truncation("line", {}, 4), [-1, 0, 1], 0),
        (G.wired_truncation("grid2d", {}, 5), [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)], (0, 0)),
    ]:
        b = bd.hitting_matrix_identity(F, B, o, exact=True)
        assert b.spec_residual == 0 and b.general_residual == 0
        assert b.substochastic


# ---------------------------------------------------------------------------
# properties

SMALL = st.sampled_from([("line", LINE_R), ("ladder", bd.direction("ladder", "left")), ("grid2d", bd.wired("grid2d"))])


@given(SMALL, st.integers(4, 9), st.data())
def test_window_kernel_laplacian_is_exact(case, r, data):
    fam, spec = case
    k = bd.window_kernel(spec, G.origin(fam), r, exact=True)
    assert bd.laplacian_residual(k) == 0
    assert min(k.values.values()) >= 0


@given(SMALL, st.integers(4, 8), st.data())
def test_two_kernel_formulas_agree_on_every_window(case, r, data):
    fam, spec = case
    o = G.origin(fam)
    F, pole = bd.window_and_pole(spec, r)
    xs = data.draw(st.lists(st.sampled_from([v for v in F.vertices if v != F.boundary]), min_size=1, max_size=4, unique=True))
    direct = bd.kernel_on_window(F, pole, o, exact=True)
    via_h = bd.kernel_from_h_at(spec, o, xs, r, exact=True)
    assert all(direct[x] == via_h[x] for x in xs)


@given(SMALL, st.data())
def test_harmonic_measure_is_a_probability(case, data):
    fam, spec = case
    pool = [v for v in G.window_vertices(fam, 3) if G.graph_distance_from_origin(fam, v) <= 2]
    B = data.draw(st.lists(st.sampled_from(pool), min_size=1, max_size=5, unique=True))
    F, pole = bd.window_and_pole(spec, 8)
    h = bd.pole_hitting(F, pole, B, exact=True)
    assert h.total == 1 and min(h.mass) >= 0


@given(SMALL, st.data())
def test_nested_sets_are_consistent(case, data):
    fam, spec = case
    pool = [v for v in G.window_vertices(fam, 3) if G.graph_distance_from_origin(fam, v) <= 2]
    Bp = data.draw(st.lists(st.sampled_from(pool), min_size=2, max_size=6, unique=True))
    B = data.draw(st.lists(st.sampled_from(Bp), min_size=1, max_size=len(Bp), unique=True))
    h = bd.harmonic_family(spec, [B, Bp], tol=1.0, cap=8, exact=True)
    assert bd.check_consistency(h, B, Bp) == 0


@given(st.fractions(0, 1), st.integers(8, 16))
def test_kernel_is_affine_in_the_boundary_point(theta, r):
    right, left = bd.direction("ladder", "right"), bd.direction("ladder", "left")
    mix = bd.mixture([(theta, right), (1 - theta, left)])
    xs = [(1, 0), (-2, 1), (3, 1)]
    km = bd.kernel_from_h_at(mix, (0, 0), xs, r, exact=True)
    kr = bd.kernel_from_h_at(right, (0, 0), xs, r, exact=True)
    kl = bd.kernel_from_h_at(left, (0, 0), xs, r, exact=True)
    assert all(km[x] == theta * kr[x] + (1 - theta) * kl[x] for x in xs)


@given(st.integers(3, 6), st.data())
def test_hitting_matrix_inverse_on_random_graphs(n, data):
    from strategies import small_graphs

    F = data.draw(small_graphs(min_n=n, max_n=n))
    B = data.draw(st.lists(st.sampled_from(F.vertices), min_size=2, max_size=n, unique=True))
    b = bd.hitting_matrix_identity(F, B, B[0], exact=True)
    assert b.general_residual == 0
    assert b.substochastic
