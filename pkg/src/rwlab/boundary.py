"""Harmonic measures from infinity and potential kernels, as limits over windows.

A boundary point is approached by a sequence of finite windows, each with a
*pole*: a probability measure on far-away vertices (or the wired vertex) from
which the walk is started. At a fixed window every quantity below is an exact
finite-graph computation; limits are taken over a doubling radius schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import graphs as G
from .graphs import BOUNDARY, FiniteGraph, Label
from .laplacian import (
    VertexMeasure,
    _AbsorbedSolver,
    apply_laplacian,
    green_column,
    hitting_matrix,
    resistances_from,
)

RADIUS_CAP = {"line": 512, "ladder": 512, "stretched_line": 512, "grid2d": 64}
MIDPOINT_CAP = 11
SNAP = 1e-12
SEQUENCES = ("axis", "neg_axis", "diagonal", "stretch_midpoints")
KINDS = ("direction", "vertex_sequence", "wired_exhaustion", "mixture")


@dataclass(frozen=True)
class BoundaryPointSpec:
    """How to approach a point at infinity of ``family``.

    ``label`` is ``right``/``left`` for directions and a sequence name for
    vertex sequences. ``parts`` holds ``(weight, spec)`` pairs for mixtures.
    """

    family: str
    kind: str
    label: str = ""
    params: dict = field(default_factory=dict)
    parts: tuple = ()

    def __post_init__(self):
        G._check_family(self.family)
        if self.kind not in KINDS:
            raise ValueError(f"unknown boundary spec kind {self.kind!r}")
        if self.kind == "direction":
            if self.family not in G.TWO_ENDED:
                raise ValueError(f"family {self.family!r} has no directional boundary points")
            if self.label not in ("right", "left"):
                raise ValueError("direction must be 'right' or 'left'")
        if self.kind == "vertex_sequence":
            if self.label not in SEQUENCES:
                raise ValueError(f"unknown vertex sequence {self.label!r}")
            if self.label == "stretch_midpoints" and self.family != "stretched_line":
                raise ValueError("stretch_midpoints needs the stretched_line family")
            if self.label == "diagonal" and self.family != "grid2d":
                raise ValueError("diagonal sequence is defined on grid2d only")
        if self.kind == "mixture":
            if not self.parts:
                raise ValueError("mixture needs components")
            total = sum(w for w, _ in self.parts)
            if abs(float(total) - 1.0) > 1e-12 or any(w < 0 for w, _ in self.parts):
                raise ValueError("mixture weights must be nonnegative and sum to 1")
            if any(s.kind in ("mixture", "wired_exhaustion") or s.label == "stretch_midpoints" for _, s in self.parts):
                raise ValueError("mixture components must be poles on a common free window")
        if self.family == "stretched_line" and self.label != "stretch_midpoints":
            if int(self.params.get("stretch", 0)) < 1:
                raise ValueError("stretched_line specs need params['stretch'] >= 1")

    @property
    def name(self) -> str:
        if self.kind == "mixture":
            return "mixture(" + ",".join(f"{float(w):g}:{s.name}" for w, s in self.parts) + ")"
        if self.kind == "wired_exhaustion":
            return "wired"
        return self.label


def direction(family: str, side: str, **params) -> BoundaryPointSpec:
    return BoundaryPointSpec(family, "direction", side, params)


def vertex_sequence(family: str, name: str = "axis", **params) -> BoundaryPointSpec:
    return BoundaryPointSpec(family, "vertex_sequence", name, params)


def wired(family: str, **params) -> BoundaryPointSpec:
    return BoundaryPointSpec(family, "wired_exhaustion", "", params)


def mixture(parts: Sequence[tuple[float, BoundaryPointSpec]]) -> BoundaryPointSpec:
    fam = parts[0][1].family
    return BoundaryPointSpec(fam, "mixture", "", dict(parts[0][1].params), tuple(parts))


def parse_spec(family: str, text: str, **params) -> BoundaryPointSpec:
    """Parse CLI spellings: right, left, wired, axis, neg_axis, diagonal,
    stretch_midpoints, or ``mix:THETA`` for THETA*right + (1-THETA)*left."""
    if text in ("right", "left"):
        return direction(family, text, **params)
    if text == "wired":
        return wired(family, **params)
    if text in SEQUENCES:
        return vertex_sequence(family, text, **params)
    if text.startswith("mix:"):
        theta = float(text[4:])
        return mixture([(theta, direction(family, "right", **params)), (1 - theta, direction(family, "left", **params))])
    raise ValueError(f"cannot parse boundary spec {text!r}")


# ---------------------------------------------------------------------------
# windows and poles


def extent(family: str, vertices: Iterable) -> int:
    return max((G.graph_distance_from_origin(family, v) for v in vertices), default=0)


def radius_schedule(spec: BoundaryPointSpec, reach: int, cap: int | None = None) -> list[int]:
    """Radii at which iterates are computed; ``reach`` bounds the queried vertices."""
    if spec.label == "stretch_midpoints":
        top = MIDPOINT_CAP if cap is None else cap
        return list(range(max(reach + 2, 3), top + 1))
    top = RADIUS_CAP[spec.family] if cap is None else cap
    r = 8
    while r < reach + 2:
        r *= 2
    out = []
    while r <= top:
        out.append(r)
        r *= 2
    if not out:
        raise ValueError(f"radius cap {top} too small for vertices at distance {reach}")
    return out


def _sequence_vertex(family: str, name: str, r: int):
    if name == "axis":
        return (r, 0) if family in ("grid2d", "ladder") else r
    if name == "neg_axis":
        return (-r, 0) if family in ("grid2d", "ladder") else -r
    if name == "diagonal":
        return (r // 2, r - r // 2)
    raise ValueError(name)


def window_and_pole(spec: BoundaryPointSpec, r: int) -> tuple[FiniteGraph, dict]:
    """The finite window at scale ``r`` and the pole measure approximating the boundary point."""
    fam, params = spec.family, dict(spec.params)
    if spec.kind == "wired_exhaustion":
        return G.wired_truncation(fam, params, r), {BOUNDARY: 1}
    if spec.label == "stretch_midpoints":
        params["stretch"] = r
        F = G.free_window(fam, 2**r, params)
        return F, {("s", r, 2 ** (r - 1)): 1}
    F = G.free_window(fam, r, params)
    if spec.kind == "direction":
        return F, {G.end_vertex(fam, spec.label, r): 1}
    if spec.kind == "vertex_sequence":
        return F, {_sequence_vertex(fam, spec.label, r): 1}
    pole: dict = {}
    for w, part in spec.parts:
        F2, p2 = window_and_pole(part, r)
        if F2.vertices != F.vertices:
            raise ValueError("mixture components live on different windows")
        for v, m in p2.items():
            pole[v] = pole.get(v, 0) + w * m
    return F, pole


def pole_hitting(F: FiniteGraph, pole: dict, B: Sequence, exact: bool = False) -> VertexMeasure:
    """P_mu(X_{T_B} = .) for the pole measure mu."""
    targets, H = hitting_matrix(F, B, exact)
    zero = Fraction(0) if exact else 0.0
    mass = [zero] * len(targets)
    for w, m in pole.items():
        row = H[F.idx(w)]
        for j in range(len(targets)):
            mass[j] += m * row[j]
    if not exact:
        mass = [max(float(x), 0.0) for x in mass]
    return VertexMeasure(targets, tuple(mass), exact)


# ---------------------------------------------------------------------------
# harmonic measures


@dataclass
class HarmonicLimit:
    """A limit measure with the log of iterates (radius, measure, sup deviation)."""

    measure: VertexMeasure
    iterates: list
    converged: bool
    radius: int
    graph: FiniteGraph = field(repr=False)
    pole: dict = field(repr=False)


def _two_hits(devs: list[float], tol: float) -> bool:
    return len(devs) >= 2 and devs[-1] < tol and devs[-2] < tol


def harmonic_measure_limit(spec: BoundaryPointSpec, B: Iterable, tol: float = 1e-6, cap: int | None = None, exact: bool = False) -> HarmonicLimit:
    """h_B as the limit of P_{pole}(X_{T_B} = .) along the radius schedule."""
    B = tuple(dict.fromkeys(B))
    if not B:
        raise ValueError("B must be nonempty")
    prev, devs, log = None, [], []
    for r in radius_schedule(spec, extent(spec.family, B), cap):
        F, pole = window_and_pole(spec, r)
        h = pole_hitting(F, pole, B, exact)
        dev = float("inf") if prev is None else h.sup_distance(prev)
        if prev is not None:
            devs.append(dev)
        log.append((r, h, dev))
        prev = h
        if _two_hits(devs, tol):
            return HarmonicLimit(h, log, True, r, F, pole)
    return HarmonicLimit(prev, log, False, log[-1][0], F, pole)


@dataclass
class HarmonicFamily:
    """Measures h_B for several finite sets, all evaluated on one final window."""

    spec: BoundaryPointSpec
    entries: dict
    radius: int
    converged: bool
    deviations: list
    graph: FiniteGraph = field(repr=False)
    pole: dict = field(repr=False)
    exact: bool = False


def harmonic_family(spec: BoundaryPointSpec, sets: Sequence[Iterable], tol: float = 1e-6, cap: int | None = None, exact: bool = False) -> HarmonicFamily:
    sets = [frozenset(s) for s in sets]
    reach = max(extent(spec.family, s) for s in sets)
    prev, devs = None, []
    for r in radius_schedule(spec, reach, cap):
        F, pole = window_and_pole(spec, r)
        cur = {s: pole_hitting(F, pole, sorted(s, key=repr), exact) for s in sets}
        if prev is not None:
            devs.append(max(cur[s].sup_distance(prev[s]) for s in sets))
        prev = cur
        if _two_hits(devs, tol):
            return HarmonicFamily(spec, cur, r, True, devs, F, pole, exact)
    return HarmonicFamily(spec, prev, r, False, devs, F, pole, exact)


def check_consistency(h: HarmonicFamily, B: Iterable, Bp: Iterable, require_subset: bool = True) -> float:
    """max_u |h_B(u) - sum_v h_B'(v) P_v(X_{T_B} = u)| on the family's window.

    With ``require_subset=False`` the identity is evaluated for any pair, which
    is meaningful when B' separates B from the boundary point.
    """
    B, Bp = frozenset(B), frozenset(Bp)
    if require_subset and not B <= Bp:
        raise ValueError("B must be a subset of B'")
    hB, hBp = h.entries[B], h.entries[Bp]
    targets, H = hitting_matrix(h.graph, sorted(B, key=repr), h.exact)
    F = h.graph
    worst = 0.0
    for j, u in enumerate(targets):
        pushed = sum((m * H[F.idx(v), j] for v, m in zip(hBp.support, hBp.mass)), Fraction(0) if h.exact else 0.0)
        worst = max(worst, abs(float(hB[u] - pushed)))
    return worst


# ---------------------------------------------------------------------------
# potential kernels


@dataclass
class PotentialKernel:
    """a(x) = a(x, root) on a set of vertices, with provenance."""

    root: Label
    values: dict
    formula: str
    radius: int | None = None
    converged: bool = True
    spec: BoundaryPointSpec | None = None
    iterates: list = field(default_factory=list)
    graph: FiniteGraph | None = field(default=None, repr=False)
    pole: dict | None = field(default=None, repr=False)

    def __call__(self, x):
        return self.values[x]

    def array(self, F: FiniteGraph | None = None, dtype=float) -> np.ndarray:
        F = F or self.graph
        return np.array([self.values[v] for v in F.vertices], dtype=dtype)


def kernel_on_window(F: FiniteGraph, pole: dict, o: Label, exact: bool = False) -> dict:
    """a(x) = sum_w mu(w) [G_w(o,o) - G_w(x,o)] / deg(o) for every vertex x of F."""
    zero = Fraction(0) if exact else 0.0
    acc = np.empty(len(F), dtype=object if exact else float)
    acc[:] = zero
    for w, m in pole.items():
        col = green_column(F, w, o, exact)
        acc = acc + m * (col[F.idx(o)] - col) / F.deg(o)
    if not exact:
        # values at solver-noise level are zeros of the kernel (e.g. behind o on a line)
        acc[np.abs(acc) <= SNAP * max(1.0, np.abs(acc).max())] = 0.0
    return dict(zip(F.vertices, acc.tolist()))


def window_kernel(spec: BoundaryPointSpec, o: Label, r: int, exact: bool = False) -> PotentialKernel:
    """The finite-window kernel at scale ``r``, defined on the whole window."""
    F, pole = window_and_pole(spec, r)
    vals = kernel_on_window(F, pole, o, exact)
    return PotentialKernel(o, vals, "limit", r, True, spec, [], F, pole)


def potential_kernel_limit(spec: BoundaryPointSpec, o: Label, targets: Iterable, tol: float = 1e-6, cap: int | None = None, exact: bool = False) -> PotentialKernel:
    """a(x, o) = lim [G_{v_n}(o,o) - G_{v_n}(x,o)] / deg(o), Cauchy along the schedule."""
    targets = list(dict.fromkeys(targets))
    prev, devs, log = None, [], []
    for r in radius_schedule(spec, extent(spec.family, targets + [o]), cap):
        F, pole = window_and_pole(spec, r)
        full = kernel_on_window(F, pole, o, exact)
        cur = {x: full[x] for x in targets}
        cur[o] = full[o]
        if prev is not None:
            devs.append(max(abs(float(cur[x] - prev[x])) for x in cur))
        log.append((r, devs[-1] if prev is not None else float("inf")))
        prev = cur
        if _two_hits(devs, tol):
            return PotentialKernel(o, cur, "limit", r, True, spec, log, F, pole)
    return PotentialKernel(o, prev, "limit", r, False, spec, log, F, pole)


def _kernel_from_h_on_window(F: FiniteGraph, pole: dict, o: Label, targets: Sequence, exact: bool) -> dict:
    """a(x) = h_{x,o}(x) R_eff(x <-> o), with h_{x,o}(x) = P_pole(T_x < T_o)."""
    res = resistances_from(F, o, targets, exact)
    zero = Fraction(0) if exact else 0.0
    out = {}
    for x in targets:
        if x == o:
            out[x] = zero
            continue
        # one-off two-point solve; not cached on the graph
        s = _AbsorbedSolver(F, frozenset((x, o)), exact)
        ix = F.idx(x)
        rhs = F.adjacency[s.keep][:, [ix]].toarray()
        if exact:
            from .laplacian import _fmpq_to_array

            col = np.empty(len(F), dtype=object)
            col[:] = zero
            col[s.keep] = _fmpq_to_array(s.solve_exact(rhs.tolist()))[:, 0]
        else:
            col = np.zeros(len(F))
            col[s.keep] = s.solve(rhs[:, 0].astype(float))
        col[ix] = Fraction(1) if exact else 1.0
        col[F.idx(o)] = zero
        h = sum((m * col[F.idx(w)] for w, m in pole.items()), zero)
        out[x] = h * res[x]
    return out


def kernel_from_h_at(spec: BoundaryPointSpec, o: Label, targets: Iterable, r: int, exact: bool = False) -> dict:
    """a(x) = h_{x,o}(x) R_eff(x <-> o) on the single window of radius ``r``."""
    F, pole = window_and_pole(spec, r)
    return _kernel_from_h_on_window(F, pole, o, list(dict.fromkeys(targets)), exact)


def potential_kernel_from_h(spec: BoundaryPointSpec, o: Label, targets: Iterable, tol: float = 1e-6, cap: int | None = None, exact: bool = False) -> PotentialKernel:
    """a(x) = h_{x,o}(x) R_eff(x <-> o), with h computed on demand from ``spec``."""
    targets = list(dict.fromkeys(targets))
    prev, devs, log = None, [], []
    for r in radius_schedule(spec, extent(spec.family, targets + [o]), cap):
        F, pole = window_and_pole(spec, r)
        cur = _kernel_from_h_on_window(F, pole, o, targets + [o], exact)
        if prev is not None:
            devs.append(max(abs(float(cur[x] - prev[x])) for x in cur))
        log.append((r, devs[-1] if prev is not None else float("inf")))
        prev = cur
        if _two_hits(devs, tol):
            return PotentialKernel(o, cur, "def", r, True, spec, log, F, pole)
    return PotentialKernel(o, prev, "def", r, False, spec, log, F, pole)


def laplacian_residual(kernel: PotentialKernel, F: FiniteGraph | None = None) -> float:
    """max over interior x of |Delta a(x) + 1(x = o)|, poles and wired vertex excluded."""
    F = F or kernel.graph
    exact = any(isinstance(v, Fraction) for v in kernel.values.values())
    a = np.array([kernel.values[v] for v in F.vertices], dtype=object if exact else float)
    lap = apply_laplacian(F, a)
    skip = set(kernel.pole or ()) | {F.boundary}
    worst = Fraction(0) if exact else 0.0
    for v in G.interior_vertices(F):
        if v in skip:
            continue
        err = abs(lap[F.idx(v)] + (1 if v == kernel.root else 0))
        worst = max(worst, err)
    return worst


# ---------------------------------------------------------------------------
# hitting-matrix inversion


@dataclass
class HittingMatrixBundle:
    index: tuple
    A: np.ndarray
    Q: np.ndarray
    D: np.ndarray
    spec_residual: float
    general_residual: float
    neumann_residual: float
    neumann_terms: int
    substochastic: bool


def inner_boundary(F: FiniteGraph, B: Iterable) -> list:
    Bs = set(B)
    return [v for v in F.vertices if v in Bs and any(w not in Bs for w, _ in F.neighbours(v))]


def _inf_norm(M) -> float:
    M = np.asarray(M, dtype=object)
    return max((sum(abs(x) for x in row) for row in M), default=0)


def hitting_matrix_identity(F: FiniteGraph, B: Iterable, o: Label, exact: bool = True, neumann_tol: float = 1e-13) -> HittingMatrixBundle:
    """A(x,y) = P_y(T_x < T_o), Q(x,y) = P_y(T^+_S < T_o, X = x), D(x) = P_x(T_o < T_x^+).

    S is the inner boundary of B without o (all of B minus o when the
    inner boundary is empty). Reports ||A D^-1 (I-Q) - I||, ||A (I-Q) D^-1 - I||
    and the truncated Neumann-series residual ||A - D sum_n Q^n||.
    """
    B = list(dict.fromkeys(B))
    if o not in B:
        raise ValueError("o must belong to B")
    S = [v for v in inner_boundary(F, B) if v != o] or [v for v in B if v != o]
    one, zero = (Fraction(1), Fraction(0)) if exact else (1.0, 0.0)
    k = len(S)
    A = np.empty((k, k), dtype=object)
    D = np.empty(k, dtype=object)
    for j, y in enumerate(S):
        for i, x in enumerate(S):
            if x == y:
                A[i, j] = one
            else:
                _, H = hitting_matrix(F, (x, o), exact)
                A[i, j] = H[F.idx(y), 0]
    _, H_so = hitting_matrix(F, tuple(S) + (o,), exact)
    Q = np.empty((k, k), dtype=object)
    Q[:] = zero
    for j, y in enumerate(S):
        for z, m in F.neighbours(y):
            p = Fraction(m, F.deg(y)) if exact else m / F.deg(y)
            Q[:, j] += p * H_so[F.idx(z), :k]
    for i, x in enumerate(S):
        _, Hx = hitting_matrix(F, (o, x), exact)
        D[i] = sum(((Fraction(m, F.deg(x)) if exact else m / F.deg(x)) * Hx[F.idx(z), 0] for z, m in F.neighbours(x)), zero)
    I = np.eye(k, dtype=int).astype(object) * one
    Dinv = np.diag([one / d for d in D]).astype(object)
    Dm = np.diag(list(D)).astype(object)
    spec_res = float(_inf_norm(A.dot(Dinv).dot(I - Q) - I))
    gen_res = float(_inf_norm(A.dot(I - Q).dot(Dinv) - I))
    Qf = Q.astype(float)
    Af, Df = A.astype(float), np.diag(D.astype(float))
    acc, term, n = np.eye(k), np.eye(k), 0
    while np.abs(term).sum(axis=0).max() > neumann_tol and n < 100_000:
        term = Qf @ term
        acc += term
        n += 1
    neu = float(np.abs(Af - Df @ acc).sum(axis=1).max())
    sub = bool((Qf >= -1e-15).all() and (Qf.sum(axis=0) <= 1 + 1e-12).all())
    if not sub:
        raise ArithmeticError("Q is not substochastic; hitting solves are inconsistent")
    return HittingMatrixBundle(tuple(S), A, Q, D, spec_res, gen_res, neu, n, sub)


# ---------------------------------------------------------------------------
# reconstruction from the Doob walk


@dataclass
class Reconstruction:
    measure: VertexMeasure
    se: dict
    samples: int
    capped: int
    last: list = field(repr=False, default_factory=list)


def reconstruct_h_from_a(a: PotentialKernel, B: Iterable, samples: int, seed: int, step_cap: int = 10**6) -> Reconstruction:
    """Law of the last visit to B of the Doob walk of ``a`` (Monte Carlo, with per-atom SE)."""
    from .walks import excursion_sample

    if samples < 10**4:
        raise ValueError("at least 10^4 samples are required")
    B = list(dict.fromkeys(B))
    if a.root not in B:
        raise ValueError("B must contain the root of the kernel")
    s = excursion_sample(a, B, [], samples, seed, step_cap)
    labels = [v for v in B]
    counts = {v: 0 for v in labels}
    for v in s.last:
        counts[v] += 1
    p = {v: counts[v] / samples for v in labels}
    se = {v: float(np.sqrt(p[v] * (1 - p[v]) / samples)) for v in labels}
    return Reconstruction(VertexMeasure(tuple(labels), tuple(p[v] for v in labels)), se, samples, s.capped, s.last)


def kernel_from_measure(F: FiniteGraph, o: Label, B: Sequence, measure_or_samples, targets: Iterable) -> dict:
    """a(x) = sum_u h_B(u) P_u(T_x < T_o) R_eff(x <-> o) for targets x in B.

    ``measure_or_samples`` is a VertexMeasure on B or a list of sampled last-visit
    vertices; for samples the value is a mean and a standard error is returned too.
    """
    res = resistances_from(F, o, targets)
    out = {}
    for x in targets:
        if x == o:
            out[x] = (0.0, 0.0)
            continue
        _, H = hitting_matrix(F, (x, o))
        f = {u: H[F.idx(u), 0] * res[x] for u in B}
        if isinstance(measure_or_samples, VertexMeasure):
            out[x] = (sum(m * f[u] for u, m in zip(measure_or_samples.support, measure_or_samples.mass)), 0.0)
        else:
            vals = np.array([f[u] for u in measure_or_samples])
            out[x] = (float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(len(vals))))
    return out
