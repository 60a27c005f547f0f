import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rwlab import boundary as bd
from rwlab import graphs as G
from rwlab import laplacian as lap
from rwlab import walks
from rwlab.scenarios import _line_inv_a_prediction


def _exact_kernel(fam, side, r):
    spec = bd.wired(fam) if side == "wired" else bd.direction(fam, side)
    return bd.window_kernel(spec, G.origin(fam), r, exact=True)


def _doob_law(a, n):
    """Exact sub-probability law of the Doob walk after n steps."""
    rows = walks.doob_rows(a.values, a.graph, a.root)
    law = {a.root: Fraction(1)}
    for _ in range(n):
        nxt = {}
        for x, p in law.items():
            for y, q in rows.get(x, {}).items():
                nxt[y] = nxt.get(y, 0) + p * q
        law = nxt
    return law


def _srw_survival(a, n):
    """Law of SRW after n steps on {T_o^+ > n, a(X_t) > 0 for 1 <= t <= n}."""
    F, o = a.graph, a.root
    law = {o: Fraction(1)}
    for _ in range(n):
        nxt = {}
        for x, p in law.items():
            for y, m in F.neighbours(x):
                if y != o and a(y) > 0:
                    nxt[y] = nxt.get(y, 0) + p * Fraction(m, F.deg(x))
        law = nxt
    return law


@pytest.mark.parametrize("fam,side,r", [("line", "right", 8), ("ladder", "right", 6), ("grid2d", "wired", 4)])
def test_doob_rows_are_stochastic_off_the_pole(fam, side, r):
    a = _exact_kernel(fam, side, r)
    rows = walks.doob_rows(a.values, a.graph, a.root)
    poles = set(a.pole)
    for x, row in rows.items():
        if x not in poles:
            assert sum(row.values()) == 1
        else:
            # the escape probability at the pole is 1 / (deg(w) a(w))
            assert 1 - sum(row.values()) == Fraction(1, a.graph.deg(x)) / a(x)


@given(st.sampled_from([("line", "right", 6), ("ladder", "left", 4), ("grid2d", "wired", 3)]), st.data())
def test_path_weight_identity(case, data):
    a = _exact_kernel(*case)
    F, o = a.graph, a.root
    rows = walks.doob_rows(a.values, F, o)
    path, p_srw, p_doob = [o], Fraction(1), Fraction(1)
    for _ in range(data.draw(st.integers(1, 6))):
        x = path[-1]
        nbrs = [(y, m) for y, m in F.neighbours(x) if y != o]
        if not nbrs:
            break
        y, m = data.draw(st.sampled_from(nbrs))
        p_srw *= Fraction(m, F.deg(x))
        p_doob *= rows.get(x, {}).get(y, 0)
        path.append(y)
    assert p_doob == F.deg(o) * a(path[-1]) * p_srw


@pytest.mark.parametrize("fam,side,r", [("line", "right", 10), ("ladder", "right", 8)])
def test_inverse_kernel_mean_is_a_survival_probability(fam, side, r):
    a = _exact_kernel(fam, side, r)
    means = []
    for n in range(1, 7):
        lhs = sum(p / a(x) for x, p in _doob_law(a, n).items())
        rhs = a.graph.deg(a.root) * sum(_srw_survival(a, n).values())
        assert lhs == rhs
        if fam == "line":
            assert float(lhs) == pytest.approx(_line_inv_a_prediction(n), abs=1e-15)
        means.append(lhs)
    # a supermartingale that loses mass, not a martingale
    assert means[0] == sum(m for y, m in a.graph.neighbours(a.root) if a(y) > 0)
    assert all(b <= a_ for a_, b in zip(means, means[1:])) and means[-1] < means[0]


def test_kernel_ratio_is_a_martingale_on_the_ladder():
    ar = _exact_kernel("ladder", "right", 8)
    al = _exact_kernel("ladder", "left", 8)
    F, o = ar.graph, ar.root
    first = sum(m * al(y) for y, m in F.neighbours(o))
    for n in range(1, 7):
        assert sum(p * al(x) / ar(x) for x, p in _doob_law(ar, n).items()) == first


def test_doob_hits_match_two_point_hitting():
    a = bd.window_kernel(bd.wired("grid2d"), (0, 0), 12)
    targets = [(1, 0), (2, 1), (0, -3)]
    mc = walks.doob_hit_probabilities(a, targets, 20_000, seed=11)
    for x in targets:
        p, se = mc[x]
        assert abs(p - lap.hitting_probability(a.graph, G.BOUNDARY, x, (0, 0))) <= 4 * se


def test_line_diagnostics_follow_the_survival_formula():
    a = bd.window_kernel(bd.direction("line", "right"), 0, 512)
    rep = walks.martingale_and_ratio_diagnostics(a, None, [1, 2, 10, 100], 4000, seed=2)
    assert rep.mean_inv_a[0] == 1.0 and rep.se_inv_a[0] == 0.0
    for c, m, s in zip(rep.checkpoints, rep.mean_inv_a, rep.se_inv_a):
        assert abs(m - _line_inv_a_prediction(c)) <= 4 * s + 1e-12


def test_gamblers_ruin_by_simulation():
    F = G.free_window("line", 4)
    k = walks.srw_kernel(F)
    counts = walks.hit_distribution_mc(k, 1, [-4, 4], 20_000, seed=4)
    p = counts[4] / 20_000
    assert abs(p - 5 / 8) <= 4 * math.sqrt(p * (1 - p) / 20_000)


def test_simulate_stop_rules_and_reproducibility():
    F = G.free_window("grid2d", 6)
    k = walks.srw_kernel(F)
    p = walks.simulate(k, (0, 0), ("fixed_steps", 25), seed=1)
    assert p.steps == 25 and p.reason == "hit_target"
    q = walks.simulate(k, (0, 0), ("first_return", (0, 0)), seed=1)
    assert q.vertices[-1] == (0, 0) and (0, 0) not in q.vertices[1:-1]
    h = walks.simulate(k, (0, 0), ("hit_set", [(3, 0), (0, 3)]), seed=9)
    assert h.vertices[-1] in [(3, 0), (0, 3)]
    assert walks.simulate(k, (0, 0), ("fixed_steps", 40), seed=5) == walks.simulate(k, (0, 0), ("fixed_steps", 40), seed=5)
    with pytest.raises(ValueError):
        walks.simulate(k, (0, 0), ("forever", 0))


def test_doob_walk_never_returns_to_root():
    a = bd.window_kernel(bd.direction("ladder", "right"), (0, 0), 64)
    path = walks.simulate(walks.doob_kernel(a), (0, 0), ("fixed_steps", 2000), seed=3)
    assert (0, 0) not in path.vertices[1:]


def test_loop_erase_example():
    assert walks.loop_erase([0, 1, 2, 1, 3, 4, 3, 5]).vertices == (0, 1, 3, 5)


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=40))
def test_loop_erase_is_self_avoiding_subsequence(seq):
    out = walks.loop_erase(seq).vertices
    assert len(set(out)) == len(out)
    assert out[0] == seq[0] and out[-1] == seq[-1]
    it = iter(seq)
    assert all(v in it for v in out)


def test_conditioned_prefix_tv():
    a = bd.window_kernel(bd.direction("line", "right"), 0, 16, exact=True)
    F = G.free_window("line", 16)
    # on the line the conditioned walk and the Doob walk agree exactly once z is beyond k
    assert walks.conditioned_prefix_tv(F, 0, 6, 4, a.values) == 0
    assert walks.conditioned_prefix_tv(F, 0, 2, 4, a.values) > 0
    with pytest.raises(ValueError):
        walks.conditioned_prefix_tv(F, 0, 0, 4, a.values)
    with pytest.raises(ValueError):
        walks.conditioned_prefix_tv(F, 0, 5, 9, a.values)


def test_doob_kernel_rejects_non_harmonic_input():
    F = G.free_window("line", 4)
    bogus = bd.PotentialKernel(0, {v: abs(v) ** 2 for v in F.vertices}, "limit", 4, graph=F, pole={4: 1})
    with pytest.raises(ValueError):
        walks.doob_kernel(bogus)


def test_excursion_sampler_matches_plain_simulation():
    a = bd.window_kernel(bd.direction("ladder", "right"), (0, 0), 32)
    targets = [(-1, 0), (-2, 1)]
    region = [(x, s) for x in range(-3, 4) for s in (0, 1)]
    fast = walks.excursion_sample(a, region, targets, 20_000, seed=8).hits.mean(axis=0)
    slow = walks.excursion_sample(a, [v for v in a.graph.vertices], targets, 20_000, seed=9).hits.mean(axis=0)
    assert np.all(np.abs(fast - slow) <= 5 * np.sqrt(fast * (1 - fast) / 10_000))


# ---------------------------------------------------------------------------
# interval decomposition


def _R_brute(z, n):
    s = 0.0
    for m in range(len(z) - n):
        s += z[n + m]
        if s > 0:
            return m
    return -1


def test_interval_example():
    z = [-1, -1, 3, -1, 2]
    dec = walks.interval_decomposition(z, offset=0)
    assert list(dec.R) == [2, 1, 0, 1, 0]
    assert dec.maximal == [(0, 2), (3, 4)]
    assert list(dec.Y) == [0, 0, 1, 0, 1]
    assert dec.dichotomy


@given(st.lists(st.sampled_from([-1.0, 1.0, 2.0, -2.0]), min_size=1, max_size=60))
def test_interval_decomposition_properties(z):
    dec = walks.interval_decomposition(z, offset=0)
    assert [int(r) for r in dec.R] == [_R_brute(z, n) for n in range(len(z))]
    assert dec.dichotomy
    ends = [e for _, e in dec.maximal]
    assert all(b[0] > a[1] for a, b in zip(dec.maximal, dec.maximal[1:]))
    assert np.all(dec.Y[ends] > 0)
    assert np.count_nonzero(dec.Y) == len(ends)
