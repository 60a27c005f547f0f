"""One experiment per verified claim; each returns metrics, pass/fail checks and tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import boundary as bd
from . import graphs as G
from . import laplacian as lap
from . import ust, walks


@dataclass
class Metric:
    name: str
    value: object
    uncertainty: float | None = None  # standard error for stochastic metrics
    exact: bool = False  # rational arithmetic
    band: float | None = None  # regression tolerance for stochastic metrics


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ScenarioResult:
    scenario: str
    metrics: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # name -> (header, rows)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def metric(self, name, value, se=None, exact=False, band=None):
        if se is not None and band is None:
            band = max(5.0 * float(se), 1e-12)
        self.metrics.append(Metric(name, value, se, exact, band))

    def check(self, name, passed, detail=""):
        self.checks.append(Check(name, bool(passed), detail))


def _ball(family, r, params=None):
    return [v for v in G.window_vertices(family, max(r, 1), params) if G.graph_distance_from_origin(family, v) <= r]


def _f(x) -> float:
    return float(x)


# ---------------------------------------------------------------------------
# potential theory


def laplacian_identity(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("laplacian_identity")
    cases = {
        "line": (bd.direction("line", "right"), opt["line_radius"]),
        "ladder": (bd.direction("ladder", "right"), opt["ladder_radius"]),
        "grid2d": (bd.wired("grid2d"), opt["grid_radius"]),
        "stretched_line": (bd.direction("stretched_line", "right", stretch=opt["stretch"]), opt["stretched_radius"]),
    }
    rows = []
    for fam in opt["families"]:
        spec, r = cases[fam]
        k = bd.window_kernel(spec, G.origin(fam), r, exact=True)
        resid = bd.laplacian_residual(k)
        nonneg = min(k.values.values()) >= 0 and k(k.root) == 0
        res.metric(f"{fam}.residual", _f(resid), exact=True)
        res.check(f"{fam}: max |Δa + 1(x=o)| <= {opt['tol']:g}", resid <= opt["tol"], f"residual {float(resid):.3g} on {len(k.graph)} vertices")
        res.check(f"{fam}: a >= 0 and a(o) = 0", nonneg)
        if fam == "line":
            res.check("line: residual exactly 0 in rational mode", resid == 0)
        rows.append([fam, r, len(k.graph), float(resid)])
    res.tables["residuals"] = (["family", "radius", "vertices", "residual"], rows)
    return res


def formula_agreement(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("formula_agreement")
    tol = opt["tol"]
    cases = [("line", bd.direction("line", "right"), list(range(-opt["line_span"], opt["line_span"] + 1)))]
    cases += [("grid2d", bd.parse_spec("grid2d", s), _ball("grid2d", opt["grid_ball"])) for s in opt["grid_specs"]]
    rows = []
    for fam, spec, targets in cases:
        if fam not in opt["families"]:
            continue
        o = G.origin(fam)
        a_def = bd.potential_kernel_from_h(spec, o, targets, tol)
        a_lim = bd.potential_kernel_limit(spec, o, targets, tol)
        gap = max(abs(a_def(x) - a_lim(x)) for x in targets)
        tag = f"{fam}/{spec.name}"
        res.metric(f"{tag}.sup_gap", gap)
        res.metric(f"{tag}.radius", a_lim.radius)
        res.metric(f"{tag}.converged", bool(a_lim.converged and a_def.converged))
        res.check(f"{tag}: ||a_def - a_limit|| <= 3 tol on {len(targets)} targets", gap <= 3 * tol and len(targets) >= 50, f"gap {gap:.3g} at radius {a_lim.radius}, converged={a_lim.converged}")
        for x in targets:
            rows.append([tag, repr(x), a_def(x), a_lim(x)])
    res.tables["kernels"] = (["case", "vertex", "a_def", "a_limit"], rows)
    return res


def consistency(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("consistency")
    rows = []
    for fam in opt["families"]:
        if fam == "grid2d":
            spec, tol, bound = bd.wired("grid2d"), opt["grid_tol"], 2 * opt["grid_tol"]
            pairs = [([G.origin(fam)], _ball(fam, 2)), (_ball(fam, 1), _ball(fam, 2)), (_ball(fam, 2), _ball(fam, 3))]
        else:
            spec, tol, bound = bd.direction(fam, "right"), opt["tol"], opt["bound"]
            pairs = [(_ball(fam, 1), _ball(fam, 2)), (_ball(fam, 2), _ball(fam, 3)), (_ball(fam, 1), _ball(fam, 4))]
        sets = {frozenset(s) for p in pairs for s in p}
        h = bd.harmonic_family(spec, list(sets), tol)
        worst = 0.0
        for B, Bp in pairs:
            dev = bd.check_consistency(h, B, Bp)
            worst = max(worst, dev)
            rows.append([fam, len(B), len(Bp), dev, h.radius])
        res.metric(f"{fam}.max_deviation", worst)
        res.check(f"{fam}: consistency deviation <= {bound:g} on {len(pairs)} nested pairs", worst <= bound, f"max deviation {worst:.3g}, radius {h.radius}, converged={h.converged}")
    res.tables["deviations"] = (["family", "size_B", "size_Bprime", "deviation", "radius"], rows)
    return res


def affine_roundtrip(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("affine_roundtrip")
    rows = []
    for fam in opt["families"]:
        o = G.origin(fam)
        a = bd.window_kernel(bd.direction(fam, "right"), o, opt["radius"])
        B = _ball(fam, 1) if fam == "line" else [(x, s) for x in (-1, 0, 1) for s in (0, 1)]
        rec = bd.reconstruct_h_from_a(a, B, opt["samples"], seed)
        back = bd.kernel_from_measure(a.graph, o, B, rec.last, B)
        ok = True
        for x in B:
            val, se = back[x]
            diff = abs(val - a(x))
            ok &= diff <= 3 * se + opt["floor"]
            rows.append([fam, repr(x), a(x), val, se])
            res.metric(f"{fam}.a_prime[{x!r}]", val, se)
        res.check(f"{fam}: a -> h' -> a' within 3 SE at every vertex of B", ok)
        # mixture linearity at a common window
        theta = opt["theta"]
        right, left = bd.direction(fam, "right"), bd.direction(fam, "left")
        mix = bd.mixture([(theta, right), (1 - theta, left)])
        targets = _ball(fam, 3) if fam == "line" else [(x, s) for x in range(-3, 4) for s in (0, 1)]
        r = opt["radius"]
        km = bd.kernel_from_h_at(mix, o, targets, r)
        kr = bd.kernel_from_h_at(right, o, targets, r)
        kl = bd.kernel_from_h_at(left, o, targets, r)
        lin = max(abs(km[x] - theta * kr[x] - (1 - theta) * kl[x]) for x in targets)
        res.metric(f"{fam}.mixture_linearity", lin)
        res.check(f"{fam}: mixture kernel is the mixture of kernels within 1e-9", lin <= 1e-9, f"{lin:.3g}")
    res.tables["roundtrip"] = (["family", "vertex", "a", "a_prime", "se"], rows)
    return res


def hitting_matrix(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("hitting_matrix")
    tri = G.graph_from_edges([("o", 1), (1, 2), (2, "o")])
    cases = [
        ("triangle", tri, ["o", 1, 2], "o"),
        ("line_wired_r4", G.wired_truncation("line", {}, 4), [-1, 0, 1], 0),
        ("grid2d_wired_r5", G.wired_truncation("grid2d", {}, 5), _ball("grid2d", 1), (0, 0)),
    ]
    rows = []
    for name, F, B, o in cases:
        b = bd.hitting_matrix_identity(F, B, o, exact=True)
        res.metric(f"{name}.residual", b.spec_residual, exact=True)
        res.metric(f"{name}.neumann_residual", b.neumann_residual)
        res.check(f"{name}: ||A D^-1 (I-Q) - I|| <= {opt['tol']:g}", b.spec_residual <= opt["tol"], f"{b.spec_residual:.3g}")
        res.check(f"{name}: A = D sum Q^n (Neumann tail)", b.neumann_residual <= 1e-10, f"{b.neumann_residual:.3g} after {b.neumann_terms} terms")
        rows.append([name, len(b.index), b.spec_residual, b.general_residual, b.neumann_residual])
    res.tables["residuals"] = (["instance", "size", "spec_residual", "general_residual", "neumann_residual"], rows)
    return res


# ---------------------------------------------------------------------------
# walks


def doob_hitting(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("doob_hitting")
    o = (0, 0)
    a = bd.window_kernel(bd.wired("grid2d"), o, opt["radius"])
    targets = [tuple(t) for t in opt["targets"]]
    mc = walks.doob_hit_probabilities(a, targets, opt["replicas"], seed)
    rows, ok = [], True
    for x in targets:
        exact = lap.hitting_probability(a.graph, G.BOUNDARY, x, o)
        p, se = mc[x]
        good = abs(p - exact) <= 3 * se
        ok &= good
        rows.append([repr(x), exact, p, se])
        res.metric(f"P_hit[{x!r}]", p, se)
    res.check(f"grid2d: Doob hitting frequency within 3 SE of h_(o,x)(x) for {len(targets)} vertices", ok)
    res.tables["hits"] = (["vertex", "h", "monte_carlo", "se"], rows)
    return res


def _line_inv_a_prediction(n: int) -> float:
    # E[1/a(X_n)] = deg(o) P_0(T_0^+ > n, X_n > 0) = P_0(T_0^+ > n) = C(m, m/2) / 2^m, m = 2 floor(n/2)
    m = n - n % 2
    return float(Fraction(math.comb(m, m // 2), 2**m))


def martingale(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("martingale")
    cps = walks.default_checkpoints(opt["steps"])
    rows = []
    for fam in opt["families"]:
        o = G.origin(fam)
        a = bd.window_kernel(bd.direction(fam, "right"), o, opt["radius"])
        rep = walks.martingale_and_ratio_diagnostics(a, None, cps, opt["replicas"], seed)
        m0, s0 = rep.mean_inv_a[0], rep.se_inv_a[0]
        const = all(abs(m - m0) <= 3 * math.hypot(s, s0) for m, s in zip(rep.mean_inv_a, rep.se_inv_a))
        if fam == "line":
            const = const and all(abs(m - 1.0) <= 3 * s + 1e-12 for m, s in zip(rep.mean_inv_a, rep.se_inv_a))
        res.check(f"{fam}: mean of 1/a(X_n) constant across checkpoints within 3 SE", const, "means " + ", ".join(f"{c}:{m:.4g}" for c, m in zip(cps, rep.mean_inv_a)))
        for i, c in enumerate(cps):
            pred = _line_inv_a_prediction(c) if fam == "line" else float("nan")
            rows.append([fam, c, rep.mean_inv_a[i], rep.se_inv_a[i], pred, rep.fraction_censored[i]])
            res.metric(f"{fam}.mean_inv_a[{c}]", float(rep.mean_inv_a[i]), float(rep.se_inv_a[i]) or 1e-12)
    res.tables["inverse_a"] = (["family", "checkpoint", "mean_inv_a", "se", "line_prediction", "fraction_censored"], rows)
    return res


def ratio_decay(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("ratio_decay")
    rows = []
    cps = opt["checkpoints"]
    for fam in opt["families"]:
        o = G.origin(fam)
        r = opt["radius"][fam]
        ar = bd.window_kernel(bd.direction(fam, "right"), o, r)
        al = bd.window_kernel(bd.direction(fam, "left"), o, r)
        reps = opt["replicas"] if fam != "line" else min(opt["replicas"], 2000)
        checkpoints = list(range(1, 11)) + [c for c in cps if c > 10] if fam == "line" else cps
        rep = walks.martingale_and_ratio_diagnostics(ar, al, checkpoints, reps, seed)
        for row in rep.rows():
            rows.append([fam] + [row[k] for k in ("checkpoint", "mean_ratio", "se_ratio", "median_ratio", "max_ratio", "mean_min_a", "fraction_censored")])
        if fam == "line":
            res.check("line: a_l/a_r(X_n) = 0 from step 1", bool(np.all(rep.max_ratio == 0.0)), f"max ratio {rep.max_ratio.max():.3g}")
        else:
            means = [rep.mean_ratio[checkpoints.index(c)] for c in cps]
            dec = all(b < a for a, b in zip(means, means[1:]))
            meds = [rep.median_ratio[checkpoints.index(c)] for c in cps]
            detail = "means " + ", ".join(f"{c}:{m:.4g}" for c, m in zip(cps, means)) + "; medians " + ", ".join(f"{c}:{m:.4g}" for c, m in zip(cps, meds))
            res.check(f"{fam}: mean a_l/a_r(X_n) decreasing over n in {cps}", dec, detail)
            for c in cps:
                i = checkpoints.index(c)
                res.metric(f"{fam}.mean_ratio[{c}]", float(rep.mean_ratio[i]), float(rep.se_ratio[i]))
                res.metric(f"{fam}.median_ratio[{c}]", float(rep.median_ratio[i]), float(rep.se_ratio[i]))
            res.metric(f"{fam}.fraction_censored", float(rep.fraction_censored[-1]))
            res.check(f"{fam}: fewer than 1% of walks leave the window", rep.fraction_censored[-1] < 0.01, f"{rep.fraction_censored[-1]:.4f}")
    res.tables["ratios"] = (["family", "checkpoint", "mean_ratio", "se_ratio", "median_ratio", "max_ratio", "mean_min_a", "fraction_censored"], rows)
    return res


def local_convergence(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("local_convergence")
    k = opt["k"]
    rows, tvs = [], []
    for z in opt["line_z"]:
        r = z + k + 2
        a = bd.window_kernel(bd.direction("line", "right"), 0, r, exact=True)
        F = G.free_window("line", r)
        tv = walks.conditioned_prefix_tv(F, 0, z, k, a.values, exact=True)
        tvs.append(tv)
        rows.append(["line", z, k, float(tv), str(tv)])
        res.metric(f"line.tv[z={z}]", str(tv), exact=True)
    dec = all(b < a for a, b in zip(tvs, tvs[1:]))
    res.check(f"line: TV(k={k}, z) strictly decreasing over z in {opt['line_z']}", dec, "values " + ", ".join(str(t) for t in tvs))
    res.check("line: final TV < 0.01", tvs[-1] < Fraction(1, 100), str(tvs[-1]))
    # nontrivial contrast on the square lattice
    ag = bd.window_kernel(bd.wired("grid2d"), (0, 0), opt["grid_radius"])
    gt = []
    for d in opt["grid_distances"]:
        tv = walks.conditioned_prefix_tv(ag.graph, (0, 0), (d, 0), opt["grid_k"], ag.values, exact=False)
        gt.append(tv)
        rows.append(["grid2d", d, opt["grid_k"], float(tv), ""])
        res.metric(f"grid2d.tv[d={d}]", float(tv))
    res.check("grid2d: TV smaller for the farther conditioning vertex", all(b < a for a, b in zip(gt, gt[1:])), ", ".join(f"{t:.4g}" for t in gt))
    res.tables["tv"] = (["family", "z", "k", "tv", "tv_exact"], rows)
    return res


def interval_decomposition(opt: dict, seed: int) -> ScenarioResult:
    from .rng import generator

    res = ScenarioResult("interval_decomposition")
    rows, ok = [], True
    for w in range(opt["windows"]):
        rng = generator(seed, "intervals", w)
        z = np.where(rng.random(opt["length"]) < 0.5 + opt["bias"] / 2, 1.0, -1.0)
        dec = walks.interval_decomposition(z)
        ok &= dec.dichotomy
        rows.append([w, len(dec.maximal), int((dec.R < 0).sum()), float(dec.Y.mean()), dec.dichotomy, dec.hypothesis_holds])
    res.metric("windows", opt["windows"])
    res.metric("mean_Y", float(np.mean([r[3] for r in rows])))
    res.check(f"dichotomy (disjoint or nested) on {opt['windows']} windows of length {opt['length']}", ok)
    res.tables["windows"] = (["window", "maximal_intervals", "censored", "mean_Y", "dichotomy", "hypothesis"], rows)
    return res


# ---------------------------------------------------------------------------
# trees


def _small_graphs():
    K4 = G.graph_from_edges([(i, j) for i in range(4) for j in range(i + 1, 4)])
    ladder = G.free_window("ladder", 1)
    chord = G.graph_from_edges([(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
    return {"K4": K4, "grid2x3": ladder, "cycle4_chord": chord}


def tree_probability(F: G.FiniteGraph, key: tuple, tau: int) -> Fraction:
    """Probability of the unoriented vertex-pair tree ``key`` (index pairs) under the UST."""
    w = 1
    for i, j in key:
        w *= F.multiplicity(F.vertices[i], F.vertices[j])
    return Fraction(w, tau)


def ust_tv(F: G.FiniteGraph, keys: list) -> float:
    tau = lap.spanning_tree_count(F)
    emp = ust.empirical_distribution(keys)
    seen = 0.0
    tv = 0.0
    for key, p in emp.items():
        q = float(tree_probability(F, key, tau))
        seen += q
        tv += abs(p - q)
    return 0.5 * (tv + max(0.0, 1.0 - seen))


def wilson_correctness(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("wilson_correctness")
    n = opt["samples"]
    rows = []
    for name, F in _small_graphs().items():
        succ = ust.wilson_successors(F, F.vertices[0], n, seed, stream=f"wilson:{name}")
        tv = ust_tv(F, ust.tree_keys(F, succ))
        rows.append(["matrix_tree", name, tv])
        res.metric(f"{name}.tv", tv, 1.0 / math.sqrt(n))
        res.check(f"{name}: sampler vs matrix-tree TV < {opt['tv_tol']}", tv < opt["tv_tol"], f"{tv:.4f}")
    # enumeration-order invariance on wired windows
    for name, F, orders in (
        ("wired_cycle4", G.wired_truncation("line", {}, 1), [[-1, 0, 1], [1, 0, -1]]),
        ("wired_grid2x3", G.wired_truncation("ladder", {}, 1), [[(0, 0), (1, 1), (-1, 0), (0, 1), (1, 0), (-1, 1)], [(-1, 1), (1, 0), (0, 1), (-1, 0), (1, 1), (0, 0)], [(1, 1), (0, 0), (-1, 1), (1, 0), (0, 1), (-1, 0)]]),
    ):
        def sampler(order, samples, s, F=F, name=name):
            return ust.tree_keys(F, ust.wilson_successors(F, F.boundary, samples, s, list(order) + [F.boundary], stream=f"order:{name}"))

        # two empirical laws over tau trees differ by about sqrt(tau / samples) in TV
        rep = ust.vertex_order_invariance_test(sampler, orders, opt["order_samples"], seed)
        rows.append(["order", name, rep["max_tv"]])
        res.metric(f"{name}.order_tv", rep["max_tv"], 1.0 / math.sqrt(opt["order_samples"]))
        res.check(f"{name}: enumeration-order TV < {opt['inv_tol']}", rep["max_tv"] < opt["inv_tol"], f"{rep['max_tv']:.4f}")
    # choice of boundary point
    ar = bd.window_kernel(bd.direction("ladder", "right"), (0, 0), 1)
    al = bd.window_kernel(bd.direction("ladder", "left"), (0, 0), 1)
    kr = ust.tree_keys(ar.graph, ust.wilson_h_successors(ar, n, seed, stream="h:right"))
    kl = ust.tree_keys(al.graph, ust.wilson_h_successors(al, n, seed, stream="h:left"))
    tv = ust.total_variation(ust.empirical_distribution(kr), ust.empirical_distribution(kl))
    rows.append(["h_choice", "ladder_r1", tv])
    res.metric("ladder.h_choice_tv", tv, 1.0 / math.sqrt(n))
    res.check(f"ladder: unoriented law independent of h, TV < {opt['inv_tol']}", tv < opt["inv_tol"], f"{tv:.4f}")
    # rooted at infinity on a wired window vs the wired root
    aw = bd.window_kernel(bd.wired("grid2d"), (0, 0), 1)
    Fw = aw.graph
    kh = ust.tree_keys(Fw, ust.wilson_h_successors(aw, n, seed, stream="h:wired"))
    kw = ust.tree_keys(Fw, ust.wilson_successors(Fw, Fw.boundary, n, seed, stream="wired"))
    tv = ust.total_variation(ust.empirical_distribution(kh), ust.empirical_distribution(kw))
    rows.append(["h_vs_wired", "grid2d_wired_r1", tv])
    res.metric("grid2d.h_vs_wired_tv", tv, 1.0 / math.sqrt(n))
    res.check(f"grid2d wired r=1: rooted-at-h vs wired-root TV < {opt['inv_tol']}", tv < opt["inv_tol"], f"{tv:.4f}")
    res.tables["tv"] = (["test", "graph", "tv"], rows)
    return res


def stretch_path_edges(k: int) -> list:
    p = G._stretch_path(k)
    return list(zip(p, p[1:]))


def deletion_inclusion(F: G.FiniteGraph, path_edges: list) -> Fraction:
    """P(all edges of a path whose interior vertices have degree 2) = 1 - sum_e tau(F - e)/tau(F)."""
    tau = lap.spanning_tree_count(F)
    miss = 0
    for u, v in path_edges:
        edges = [(a, b, m - 1 if {a, b} == {u, v} else m) for a, b, m in F.edges]
        edges = [e for e in edges if e[2] > 0]
        miss += lap._reduced_laplacian_det(F.vertices, edges)
    return 1 - Fraction(miss, tau)


def counterexample_bound(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("counterexample_bound")
    N, r = opt["stretch"], opt["radius"]
    F = G.wired_truncation("stretched_line", {"stretch": N}, r)
    rows, total, total_oracle, ok = [], Fraction(0), Fraction(0), True
    for k in range(1, N + 1):
        edges = stretch_path_edges(k)
        p = lap.forest_inclusion_probability(F, edges)
        q = deletion_inclusion(F, edges)
        bound = Fraction(2 * k, 2**k + 2 * k)
        sharper = Fraction(k, 2**k + k)
        total += p
        total_oracle += q
        ok &= p <= bound
        rows.append([k, str(p), float(p), str(bound), float(bound), p <= sharper])
        res.metric(f"P[{k}]", str(p), exact=True)
    res.check(f"P_k <= 2k/(2^k+2k) for k = 1..{N}", ok)
    res.check("sum of P_k equals the deletion-determinant oracle exactly", total == total_oracle, f"{total} vs {total_oracle}")
    res.metric("sum_P", str(total), exact=True)
    res.tables["inclusion"] = (["k", "P_exact", "P", "bound_exact", "bound", "below_k_over_2k_plus_k"], rows)
    return res


def cocycle(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("cocycle")
    n_max = opt["n_max"]
    sp = ust.spine_cocycle_profile("ladder", ust.canonical_spine("ladder", 4 * n_max), n_max)
    # restrict the residual to |n|, |m| <= n_res
    res.metric("cocycle_residual", sp.cocycle_residual)
    res.metric("rerooting_residual", sp.rerooting_residual)
    res.check(f"ladder: cocycle residual <= {opt['tol']:g} for |n|,|m| <= {n_max}", sp.cocycle_residual <= opt["tol"], f"{sp.cocycle_residual:.3g}")
    res.check("ladder: re-rooting identity residual <= 1e-8", sp.rerooting_residual <= 1e-8, f"{sp.rerooting_residual:.3g}")
    res.check("ladder: M(n) > 0 for all n >= n+", sp.n_plus is not None, f"n+ = {sp.n_plus}")
    ratios = [float(m / ar) for n, m, ar in zip(sp.n, sp.M, sp.a_r) if n >= opt["ratio_from"]]
    res.check(f"ladder: M(n)/a_r in [0.9, 1.0] for n >= {opt['ratio_from']}", all(0.9 <= q <= 1.0 for q in ratios), f"min {min(ratios):.4f}, max {max(ratios):.4f}")
    res.metric("n_plus", sp.n_plus)
    res.metric(f"ratio[{opt['ratio_from']}]", ratios[0])
    res.tables["spine"] = (["n", "a_r", "a_l", "M", "R_eff", "d"], [list(r.values()) for r in sp.rows()])
    return res


def resistance_slope(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("resistance_slope")
    rows = []
    line = ust.spine_resistance_slope("line", opt["line_radii"], opt["line_nmax"], exact=True)
    s_line = line.slopes[max(line.slopes)]
    res.metric("line.slope", str(s_line), exact=True)
    res.check("line: slope exactly 1", s_line == 1, str(s_line))
    lad = ust.spine_resistance_slope("ladder", opt["ladder_radii"], opt["ladder_nmax"])
    s_lad = lad.slopes[max(lad.slopes)]
    res.metric("ladder.slope", float(s_lad))
    res.metric("ladder.stability", lad.stability)
    res.check("ladder: slope positive and stable to 2% across the two largest radii", s_lad > 0 and lad.stability <= 0.02, f"slope {float(s_lad):.6f}, stability {lad.stability:.2e}")
    st = ust.spine_resistance_slope("stretched_line", opt["stretched_radii"], opt["stretched_nmax"], {"stretch": opt["stretch"]})
    s_st = st.slopes[max(st.slopes)]
    res.metric("stretched_line.slope", float(s_st))
    res.check("stretched_line: slope along the line positive", s_st > 0, f"{float(s_st):.6f}")
    worst = max(line.max_excess, lad.max_excess, st.max_excess)
    res.check("R_eff(o, s_n) <= d(o, s_n) pointwise", worst <= 1e-12, f"max excess {worst:.3g}")
    for fam, rep in (("line", line), ("ladder", lad), ("stretched_line", st)):
        for r, prof in rep.profile.items():
            rows += [[fam, r, n, float(y), d] for n, y, d in prof]
    res.tables["resistance"] = (["family", "radius", "n", "R_eff", "d"], rows)
    return res


def tip_escape(opt: dict, seed: int) -> ScenarioResult:
    res = ScenarioResult("tip_escape")
    prof = ust.past_reach_profile(opt["radii"], opt["replicas"], seed)
    mono = all(b.probability <= a.probability + 3 * math.hypot(a.se, b.se) for a, b in zip(prof, prof[1:]))
    res.check("grid2d: past-reach probability nonincreasing in r (3 SE)", mono, ", ".join(f"{p.radius}:{p.probability:.4f}" for p in prof))
    for p in prof:
        res.metric(f"grid2d.past_reach[{p.radius}]", p.probability, p.se)
    rows = [["past_reach", p.radius, p.probability, p.se] for p in prof]
    # ends proxy
    F = G.wired_truncation("grid2d", {}, opt["grid_radius"])
    succ = ust.wilson_successors(F, F.boundary, opt["samples"], seed, stream="ends:grid2d")
    ones = np.mean([ust.ends_proxy(ust.OrientedTree.from_successors(F, s, "toward_wired_boundary")) == 1 for s in succ])
    res.metric("grid2d.frac_one_ended", float(ones), math.sqrt(ones * (1 - ones) / opt["samples"]) or 1e-12)
    res.check(f"grid2d r={opt['grid_radius']}: ends proxy = 1 in >= 95% of samples", ones >= 0.95, f"{ones:.4f}")
    a = bd.window_kernel(bd.direction("ladder", "right"), (0, 0), opt["ladder_radius"])
    succ = ust.wilson_h_successors(a, opt["samples"], seed, stream="ends:ladder")
    twos = np.mean([ust.ends_proxy(ust.OrientedTree.from_successors(a.graph, s, "toward_h")) == 2 for s in succ])
    res.metric("ladder.frac_two_ended", float(twos), math.sqrt(twos * (1 - twos) / opt["samples"]) or 1e-12)
    res.check(f"ladder r={opt['ladder_radius']}: ends proxy = 2 in >= 95% of samples", twos >= 0.95, f"{twos:.4f}")
    rows += [["ends_grid2d", opt["grid_radius"], float(ones), 0.0], ["ends_ladder", opt["ladder_radius"], float(twos), 0.0]]
    res.tables["tip_escape"] = (["statistic", "radius", "value", "se"], rows)
    return res


# ---------------------------------------------------------------------------
# registry

ALL_FAMILIES = ["line", "ladder", "grid2d", "stretched_line"]

REGISTRY: dict[str, tuple[Callable, dict]] = {
    "laplacian_identity": (laplacian_identity, dict(families=ALL_FAMILIES, line_radius=64, ladder_radius=49, grid_radius=9, stretched_radius=90, stretch=3, tol=1e-8)),
    "formula_agreement": (formula_agreement, dict(families=["line", "grid2d"], tol=1e-6, line_span=30, grid_ball=5, grid_specs=["wired", "axis"])),
    "consistency": (consistency, dict(families=["line", "ladder", "grid2d"], tol=1e-10, bound=1e-9, grid_tol=1e-3)),
    "affine_roundtrip": (affine_roundtrip, dict(families=["line", "ladder"], radius=64, samples=100_000, theta=0.3, floor=1e-9)),
    "hitting_matrix": (hitting_matrix, dict(tol=1e-8)),
    "doob_hitting": (doob_hitting, dict(radius=32, replicas=100_000, targets=[[1, 0], [0, 2], [1, 1], [2, 1], [3, 0], [-2, -1], [0, -3], [-1, 2], [2, -1], [-3, 0]])),
    "martingale": (martingale, dict(families=["line", "ladder"], radius=512, steps=10_000, replicas=2000)),
    "ratio_decay": (ratio_decay, dict(families=["line", "ladder"], radius={"line": 512, "ladder": 512}, checkpoints=[100, 1000, 10_000], replicas=10_000)),
    "local_convergence": (local_convergence, dict(k=4, line_z=[5, 10, 20], grid_radius=32, grid_distances=[4, 8], grid_k=3)),
    "wilson_correctness": (wilson_correctness, dict(samples=100_000, order_samples=400_000, tv_tol=0.02, inv_tol=0.03)),
    "counterexample_bound": (counterexample_bound, dict(stretch=5, radius=5)),
    "cocycle": (cocycle, dict(n_max=40, tol=1e-8, ratio_from=30)),
    "resistance_slope": (resistance_slope, dict(line_radii=[40, 80], line_nmax=30, ladder_radii=[64, 128, 256], ladder_nmax=40, stretched_radii=[32, 64], stretched_nmax=20, stretch=4)),
    "tip_escape": (tip_escape, dict(radii=[2, 4, 8, 16, 32], replicas=10_000, grid_radius=40, ladder_radius=50, samples=1000)),
    "interval_decomposition": (interval_decomposition, dict(windows=100, length=10_000, bias=0.2)),
}

SCENARIOS = tuple(REGISTRY)


def run(name: str, options: dict | None = None, seed: int = 0) -> ScenarioResult:
    if name not in REGISTRY:
        raise KeyError(f"unknown scenario {name!r}")
    fn, defaults = REGISTRY[name]
    opt = dict(defaults)
    opt.update(options or {})
    return fn(opt, seed)
