"""Simple and Doob-transformed random walks, loop erasure and walk diagnostics."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from . import _kernels as K
from .boundary import PotentialKernel
from .graphs import FiniteGraph, Label
from .laplacian import hitting_matrix
from .rng import replica_seed, replica_seeds

ROW_TOL = 1e-9
REASONS = {K.STOP_HIT: "hit_target", K.STOP_CAP: "step_cap", K.STOP_LEFT: "left_window"}


# ---------------------------------------------------------------------------
# transition kernels


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Row-wise transition probabilities on the vertices of ``graph``.

    For Doob kernels the rows at pole vertices are substochastic; the missing
    mass is the probability of escaping to the boundary point. ``exit_mask``
    flags vertices treated as absorbing when simulating.
    """

    graph: FiniteGraph
    kind: str
    indptr: np.ndarray
    indices: np.ndarray
    probs: np.ndarray
    root: Label | None = None
    kernel: PotentialKernel | None = None
    exit_mask: np.ndarray = field(default=None)

    def __post_init__(self):
        cum = np.empty_like(self.probs)
        for i in range(len(self.indptr) - 1):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            cum[lo:hi] = np.cumsum(self.probs[lo:hi])
            if hi > lo and abs(cum[hi - 1] - 1.0) < 1e-12:
                cum[hi - 1] = 1.0
        object.__setattr__(self, "cum", cum)
        if self.exit_mask is None:
            object.__setattr__(self, "exit_mask", np.zeros(len(self.graph), dtype=np.bool_))

    def row(self, v: Label) -> list[tuple[Label, float]]:
        i = self.graph.idx(v)
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return [(self.graph.vertices[j], float(p)) for j, p in zip(self.indices[lo:hi], self.probs[lo:hi]) if p > 0]

    def kill_probability(self, v: Label) -> float:
        i = self.graph.idx(v)
        return max(0.0, 1.0 - float(self.probs[self.indptr[i] : self.indptr[i + 1]].sum()))

    def arrays(self):
        return self.indptr, self.indices, self.cum


def _mask(F: FiniteGraph, vertices: Iterable) -> np.ndarray:
    m = np.zeros(len(F), dtype=np.bool_)
    for v in vertices:
        m[F.idx(v)] = True
    return m


def srw_kernel(F: FiniteGraph, exits: Iterable = ()) -> TransitionKernel:
    A = F.adjacency
    probs = A.data / np.repeat(F.degree, np.diff(A.indptr))
    return TransitionKernel(F, "srw", A.indptr.astype(np.int64), A.indices.astype(np.int64), probs.astype(float), exit_mask=_mask(F, exits))


def doob_rows(a: dict, F: FiniteGraph, o: Label) -> dict:
    """Exact Doob rows {x: {y: p}} (rational if ``a`` is rational)."""
    rows = {}
    for x in F.vertices:
        if x != o and a[x] <= 0:
            continue
        row = {}
        for y, m in F.neighbours(x):
            if a[y] <= 0:
                continue
            if x == o:
                row[y] = a[y] * m
            else:
                row[y] = a[y] * Fraction(m, F.deg(x)) / a[x] if isinstance(a[x], Fraction) else a[y] * m / (F.deg(x) * a[x])
        rows[x] = row
    return rows


def doob_kernel(a: PotentialKernel, F: FiniteGraph | None = None, exits: Iterable | None = None, check: bool = True) -> TransitionKernel:
    """p(x,y) = a(y)/a(x) * m(x,y)/deg(x) for x != o and p(o,y) = a(y) m(o,y).

    Rows must sum to one except at the kernel's poles (and the wired vertex),
    where the deficit is the escape probability.
    """
    F = F or a.graph
    o = a.root
    vals = np.array([float(a.values[v]) for v in F.vertices])
    if vals.min() < -1e-12:
        raise ValueError("potential kernel takes negative values")
    A = F.adjacency
    rows = np.repeat(np.arange(len(F)), np.diff(A.indptr))
    src, dst = vals[rows], vals[A.indices]
    deg = F.degree[rows]
    probs = np.zeros(len(A.data))
    pos = dst > 0
    io = F.idx(o)
    at_o = rows == io
    probs[at_o & pos] = dst[at_o & pos] * A.data[at_o & pos]
    live = ~at_o & pos & (src > 0)
    probs[live] = dst[live] / src[live] * A.data[live] / deg[live]
    poles = set(a.pole or ()) | ({F.boundary} if F.boundary is not None else set())
    if check:
        sums = np.bincount(rows, weights=probs, minlength=len(F))
        for i, v in enumerate(F.vertices):
            if v in poles or (v != o and vals[i] <= 0):
                continue
            if abs(sums[i] - 1.0) > ROW_TOL:
                raise ValueError(f"Doob row at {v!r} sums to {sums[i]!r}; a is not harmonic there")
    exits = poles if exits is None else exits
    return TransitionKernel(F, "doob", A.indptr.astype(np.int64), A.indices.astype(np.int64), probs, o, a, _mask(F, exits))


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class Path:
    vertices: tuple
    reason: str

    @property
    def steps(self) -> int:
        return len(self.vertices) - 1


@dataclass(frozen=True)
class LoopErasedPath:
    vertices: tuple
    source: Path | None = None


def _seed32(seed: int) -> int:
    return int(seed) & 0x7FFFFFFF


def simulate(kernel: TransitionKernel, start: Label, stop_rule: tuple, step_cap: int = 10**6, seed: int = 0) -> Path:
    """Run one path. ``stop_rule`` is ("hit_set", B), ("first_return", o) or ("fixed_steps", n)."""
    F = kernel.graph
    kind = stop_rule[0]
    stop = np.zeros(len(F), dtype=np.bool_)
    min_steps = 0
    if kind == "hit_set":
        stop = _mask(F, stop_rule[1])
    elif kind == "first_return":
        stop = _mask(F, [stop_rule[1]])
        min_steps = 1
    elif kind == "fixed_steps":
        step_cap = int(stop_rule[1])
    else:
        raise ValueError(f"unknown stop rule {kind!r}")
    idx, reason = K.walk_path(*kernel.arrays(), F.idx(start), stop, kernel.exit_mask, min_steps, int(step_cap), _seed32(replica_seed(seed, "simulate", 0)))
    if kind == "fixed_steps" and reason == K.STOP_CAP:
        reason = K.STOP_HIT
    return Path(tuple(F.vertices[i] for i in idx), REASONS[int(reason)])


def hit_distribution_mc(kernel: TransitionKernel, start: Label, B: Iterable, replicas: int, seed: int, step_cap: int = 10**7) -> dict:
    """Empirical law of the first vertex of B reached (key None for censored runs)."""
    F = kernel.graph
    seeds = replica_seeds(seed, "hit_distribution", replicas)
    out = K.hit_first(*kernel.arrays(), F.idx(start), _mask(F, B), step_cap, seeds)
    labels, counts = np.unique(out, return_counts=True)
    return {(F.vertices[i] if i >= 0 else None): int(c) for i, c in zip(labels, counts)}


def loop_erase(path: Sequence | Path) -> LoopErasedPath:
    """Chronological loop erasure."""
    src = path if isinstance(path, Path) else None
    seq = path.vertices if isinstance(path, Path) else tuple(path)
    if not seq:
        raise ValueError("path must be nonempty")
    out: list = []
    pos: dict = {}
    for v in seq:
        if v in pos:
            cut = pos[v]
            for w in out[cut + 1 :]:
                del pos[w]
            del out[cut + 1 :]
        else:
            pos[v] = len(out)
            out.append(v)
    return LoopErasedPath(tuple(out), src)


# ---------------------------------------------------------------------------
# conditioned prefixes


def conditioned_prefix_tv(F: FiniteGraph, o: Label, z: Label, k: int, a: dict, exact: bool = True, max_k: int = 8) -> float | Fraction:
    """TV between length-k prefixes of SRW from o conditioned on T_z < T_o^+ and the Doob walk of ``a``.

    Both laws are computed exactly by enumerating all k-step paths in F.
    """
    if k < 1 or k > max_k:
        raise ValueError(f"k must lie in 1..{max_k}")
    if z == o:
        raise ValueError("z must differ from o")
    targets, H = hitting_matrix(F, (z, o), exact)
    reach = {v: H[F.idx(v), 0] for v in F.vertices}
    zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    cond: dict = {}
    doob: dict = {}

    def extend(path, prob, state):
        # state: 0 undecided, 1 hit z first, 2 returned to o first
        if len(path) == k + 1:
            key = tuple(path)
            x = path[-1]
            if state == 1:
                w = prob
            elif state == 2:
                w = zero
            else:
                w = prob * reach[x]
            cond[key] = w
            returned = any(v == o for v in path[1:])
            doob[key] = zero if returned else F.deg(o) * a[x] * prob
            return
        x = path[-1]
        for y, m in F.neighbours(x):
            p = Fraction(m, F.deg(x)) if exact else m / F.deg(x)
            s = state
            if s == 0 and y == z:
                s = 1
            elif s == 0 and y == o:
                s = 2
            extend(path + [y], prob * p, s)

    extend([o], one, 0)
    norm = sum(cond.values(), zero)
    if norm == 0:
        raise ValueError("conditioning event has probability zero")
    tv = sum((abs(cond[p] / norm - doob[p]) for p in cond), zero) / 2
    return tv


# ---------------------------------------------------------------------------
# diagnostics


def default_checkpoints(steps: int) -> list[int]:
    out, c = [1], 10
    while c < steps:
        out.append(c)
        c *= 10
    out.append(int(steps))
    return sorted(set(out))


@dataclass
class DiagnosticsReport:
    checkpoints: list
    mean_inv_a: np.ndarray
    se_inv_a: np.ndarray
    mean_ratio: np.ndarray
    se_ratio: np.ndarray
    median_ratio: np.ndarray
    max_ratio: np.ndarray
    mean_min_a: np.ndarray
    fraction_censored: np.ndarray
    replicas: int

    def rows(self) -> list[dict]:
        keys = ("mean_inv_a", "se_inv_a", "mean_ratio", "se_ratio", "median_ratio", "max_ratio", "mean_min_a", "fraction_censored")
        return [{"checkpoint": c, **{k: float(getattr(self, k)[i]) for k in keys}} for i, c in enumerate(self.checkpoints)]


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    x = x[np.isfinite(x)]
    if len(x) == 0:
        return float("nan"), float("nan")
    se = x.std(ddof=1) / np.sqrt(len(x)) if len(x) > 1 else float("nan")
    return float(x.mean()), float(se)


def martingale_and_ratio_diagnostics(a: PotentialKernel, a_other: PotentialKernel | None, checkpoints: Sequence[int], replicas: int, seed: int, kernel: TransitionKernel | None = None) -> DiagnosticsReport:
    """Checkpoint statistics of 1/a(X_n), a_other(X_n)/a(X_n) and min_{t<=n} a(X_t) along the Doob walk of a."""
    if replicas < 1:
        raise ValueError("replicas must be positive")
    kernel = kernel or doob_kernel(a)
    F = kernel.graph
    vals = np.array([float(a.values[v]) for v in F.vertices])
    other = np.array([float(a_other.values[v]) for v in F.vertices]) if a_other is not None else np.zeros(len(F))
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(vals > 0, 1.0 / vals, np.inf)
        ratio = np.where(vals > 0, other / vals, np.inf)
    cps = np.array(sorted(set(int(c) for c in checkpoints)), dtype=np.int64)
    seeds = replica_seeds(seed, "diagnostics", replicas)
    out, mins = K.checkpoint_values(*kernel.arrays(), F.idx(a.root), cps, np.vstack([inv, ratio]), vals, kernel.exit_mask, seeds)
    C = len(cps)
    rep = {k: np.empty(C) for k in ("mi", "si", "mr", "sr", "med", "mx", "mm", "fc")}
    for c in range(C):
        rep["mi"][c], rep["si"][c] = _mean_se(out[:, 0, c])
        rep["mr"][c], rep["sr"][c] = _mean_se(out[:, 1, c])
        r = out[:, 1, c]
        r = r[np.isfinite(r)]
        rep["med"][c] = np.median(r) if len(r) else np.nan
        rep["mx"][c] = r.max() if len(r) else np.nan
        rep["mm"][c] = np.nanmean(mins[:, c]) if np.isfinite(mins[:, c]).any() else np.nan
        rep["fc"][c] = float(np.isnan(out[:, 0, c]).mean())
    return DiagnosticsReport(cps.tolist(), rep["mi"], rep["si"], rep["mr"], rep["sr"], rep["med"], rep["mx"], rep["mm"], rep["fc"], replicas)


def visits_to_set(kernel: TransitionKernel, predicate: Callable[[Label], bool], checkpoints: Sequence[int], replicas: int, seed: int, start: Label | None = None) -> dict:
    """Per-replica visit counts to {v : predicate(v)} at each checkpoint; -1 marks censored runs."""
    F = kernel.graph
    start = kernel.root if start is None else start
    mask = np.array([v != F.boundary and bool(predicate(v)) for v in F.vertices], dtype=np.bool_)
    cps = np.array(sorted(set(int(c) for c in checkpoints)), dtype=np.int64)
    seeds = replica_seeds(seed, "visits", replicas)
    counts = K.visit_counts(*kernel.arrays(), F.idx(start), mask, cps, kernel.exit_mask, seeds)
    med = []
    for c in range(len(cps)):
        col = counts[:, c]
        col = col[col >= 0]
        med.append(float(np.median(col)) if len(col) else float("nan"))
    return {"checkpoints": cps.tolist(), "counts": counts, "median": med, "fraction_censored": (counts < 0).mean(axis=0).tolist()}


# ---------------------------------------------------------------------------
# excursion sampling with exact re-entry jumps


@dataclass
class ExcursionSample:
    region: tuple
    targets: tuple
    hits: np.ndarray
    last: list
    capped: int


def excursion_sample(a: PotentialKernel, region: Iterable, targets: Iterable, replicas: int, seed: int, step_cap: int = 10**6) -> ExcursionSample:
    """Sample the Doob walk of ``a`` (killed at its poles, never absorbed) restricted to its visits to ``region``.

    Leaving the region is replaced by a jump to the re-entry point drawn from
    P_w(re-enter at u) = a(u)/a(w) P_w(X_{T_region} = u), computed exactly on
    the window; the remaining mass is the probability of never returning.
    The law of the sequence of region visits is unchanged.
    """
    F = a.graph
    o = a.root
    kernel = doob_kernel(a, F, exits=())
    region = list(dict.fromkeys(region))
    if o not in region:
        raise ValueError("region must contain the root")
    targets = list(dict.fromkeys(targets))
    in_b = _mask(F, region)
    if any(not in_b[F.idx(t)] for t in targets):
        raise ValueError("targets must lie in the region")
    outer = [v for v in F.vertices if not in_b[F.idx(v)] and any(in_b[F.idx(w)] for w, _ in F.neighbours(v))]
    entry = [v for v in region if any(not in_b[F.idx(w)] for w, _ in F.neighbours(v))]
    vals = {v: float(a.values[v]) for v in F.vertices}
    jump_row = np.full(len(F), -1, dtype=np.int64)
    jump_cum = np.zeros((max(len(outer), 1), max(len(entry), 1)))
    if outer and entry:
        cols, H = hitting_matrix(F, entry)
        col_pos = [cols.index(u) for u in entry]
        for i, w in enumerate(outer):
            jump_row[F.idx(w)] = i
            row = np.array([vals[u] / vals[w] * H[F.idx(w), c] if vals[w] > 0 else 0.0 for u, c in zip(entry, col_pos)])
            jump_cum[i] = np.cumsum(row)
    entry_idx = np.array([F.idx(u) for u in entry] or [0], dtype=np.int64)
    if not entry:
        entry_idx = entry_idx[:0]
    target_col = np.full(len(F), -1, dtype=np.int64)
    for j, t in enumerate(targets):
        target_col[F.idx(t)] = j
    seeds = replica_seeds(seed, "excursion", replicas)
    hits, last, status = K.excursion_walk(*kernel.arrays(), F.idx(o), in_b, jump_row, jump_cum, entry_idx, target_col, len(targets), int(step_cap), seeds)
    return ExcursionSample(tuple(region), tuple(targets), hits, [F.vertices[i] for i in last], int(status.sum()))


def doob_hit_probabilities(a: PotentialKernel, targets: Iterable, replicas: int, seed: int, region: Iterable | None = None) -> dict:
    """Monte Carlo P(Doob walk ever visits x) with standard errors, per target."""
    targets = list(dict.fromkeys(targets))
    if region is None:
        from .boundary import extent
        from .graphs import graph_distance_from_origin

        fam = a.graph.family
        rad = extent(fam, targets + [a.root])
        region = [v for v in a.graph.vertices if v != a.graph.boundary and graph_distance_from_origin(fam, v) <= rad]
    s = excursion_sample(a, region, targets, replicas, seed)
    p = s.hits.mean(axis=0)
    se = np.sqrt(p * (1 - p) / replicas)
    return {t: (float(p[j]), float(se[j])) for j, t in enumerate(targets)}


# ---------------------------------------------------------------------------
# interval decomposition


@dataclass
class IntervalDecomposition:
    offset: int
    R: np.ndarray  # -1 where censored
    maximal: list  # (k, k + R_k) in window coordinates
    Y: np.ndarray
    dichotomy: bool
    backward_positive_from: int | None

    @property
    def hypothesis_holds(self) -> bool:
        return self.backward_positive_from is not None


def _laminar(intervals: list[tuple[int, int]]) -> bool:
    stack: list = []
    for s, e in sorted(intervals, key=lambda t: (t[0], -t[1])):
        while stack and stack[-1][1] < s:
            stack.pop()
        if stack and e > stack[-1][1]:
            return False
        stack.append((s, e))
    return True


def interval_decomposition(z: Sequence[float], offset: int | None = None) -> IntervalDecomposition:
    """R_n = inf{m >= 0 : z_n + ... + z_{n+m} > 0}, the maximal intervals [k, k+R_k] and Y.

    ``z[j]`` is the value at index ``offset + j`` (default: centred window).
    """
    z = np.asarray(z, dtype=float)
    N = len(z)
    if offset is None:
        offset = -(N // 2)
    S = np.concatenate([[0.0], np.cumsum(z)])
    # next strictly greater prefix sum, scanning from the right
    nxt = np.full(N + 1, -1, dtype=np.int64)
    stack: list[int] = []
    for j in range(N, -1, -1):
        while stack and S[stack[-1]] <= S[j]:
            stack.pop()
        nxt[j] = stack[-1] if stack else -1
        stack.append(j)
    R = np.where(nxt[:N] >= 0, nxt[:N] - np.arange(N) - 1, -1)
    intervals = [(n, n + int(R[n])) for n in range(N) if R[n] >= 0]
    maximal, reach = [], -1
    for s, e in intervals:
        if e > reach:
            maximal.append((s, e))
            reach = e
    Y = np.zeros(N)
    for s, e in maximal:
        Y[e] = S[e + 1] - S[s]
    ok = _laminar(intervals)
    # backward sums z_0 + z_{-1} + ... + z_{-n} from the window centre
    c = -offset
    back = np.cumsum(z[c::-1]) if 0 <= c < N else np.array([])
    bad = np.nonzero(back <= 0)[0]
    start = None
    if len(back):
        start = 0 if len(bad) == 0 else (int(bad[-1]) + 1 if bad[-1] + 1 < len(back) else None)
    return IntervalDecomposition(offset, R, [(s + offset, e + offset) for s, e in maximal], Y, ok, start)
