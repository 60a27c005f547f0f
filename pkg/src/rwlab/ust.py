"""Wilson's algorithm (finite root, wired root, rooted at a boundary point) and tree statistics."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K
from . import graphs as G
from .boundary import PotentialKernel, kernel_on_window, potential_kernel_limit, window_and_pole
from .graphs import FiniteGraph, Label
from .laplacian import green_column, resistances_from
from .rng import replica_seeds
from .walks import _mask, doob_kernel, srw_kernel

ORIENTATIONS = ("toward_finite_root", "toward_wired_boundary", "toward_h")


@dataclass(eq=False)
class OrientedTree:
    """A spanning tree of ``graph`` given by a parent map.

    ``root`` is the unique vertex without a parent: a finite root, the wired
    vertex, or (for trees rooted at a boundary point) the window vertex where
    the first branch escaped.
    """

    graph: FiniteGraph
    parent: dict
    root: Label
    orientation: str

    @classmethod
    def from_successors(cls, F: FiniteGraph, nxt: np.ndarray, orientation: str) -> "OrientedTree":
        parent, root = {}, None
        for i, j in enumerate(nxt):
            v = F.vertices[i]
            if j < 0:
                if root is not None:
                    raise ValueError("successor array has more than one root")
                root = v
                parent[v] = None
            else:
                parent[v] = F.vertices[j]
        return cls(F, parent, root, orientation)

    def edges(self) -> frozenset:
        return frozenset(frozenset((v, p)) for v, p in self.parent.items() if p is not None)

    def children(self) -> dict:
        ch: dict = {v: [] for v in self.parent}
        for v, p in self.parent.items():
            if p is not None:
                ch[p].append(v)
        return ch

    def future(self, v: Label) -> list:
        out = [v]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
            if len(out) > len(self.parent):
                raise ValueError("parent map has a cycle")
        return out

    def past(self, v: Label) -> set:
        ch = self.children()
        seen, frontier = {v}, [v]
        while frontier:
            for c in ch[frontier.pop()]:
                seen.add(c)
                frontier.append(c)
        return seen

    def is_spanning_tree(self) -> bool:
        F = self.graph
        if set(self.parent) != set(F.vertices):
            return False
        if sum(p is None for p in self.parent.values()) != 1:
            return False
        for v, p in self.parent.items():
            if p is not None and F.multiplicity(v, p) == 0:
                return False
        return all(self.future(v)[-1] == self.root for v in self.parent)

    def path(self, u: Label, v: Label) -> list:
        fu, fv = self.future(u), self.future(v)
        sv = {w: i for i, w in enumerate(fv)}
        for i, w in enumerate(fu):
            if w in sv:
                return fu[: i + 1] + fv[: sv[w]][::-1]
        raise ValueError("vertices are in different components")

    def to_json(self) -> dict:
        enc = G._thaw
        return {"parents": [[enc(v), enc(p)] for v, p in self.parent.items()], "root": enc(self.root), "orientation": self.orientation}


# ---------------------------------------------------------------------------
# samplers


def _order_indices(F: FiniteGraph, order: Sequence | None) -> np.ndarray:
    if order is None:
        return np.arange(len(F), dtype=np.int64)
    idx = [F.idx(v) for v in order]
    if len(set(idx)) != len(idx):
        raise ValueError("vertex order repeats a vertex")
    return np.array(idx, dtype=np.int64)


def wilson_successors(F: FiniteGraph, root: Label, samples: int, seed: int, order: Sequence | None = None, stream: str = "wilson") -> np.ndarray:
    """Successor arrays (samples x |V|) of Wilson trees rooted at ``root``."""
    srw = srw_kernel(F)
    in_tree = _mask(F, [root])
    dummy = np.zeros(1)
    seeds = replica_seeds(seed, stream, samples)
    return K.wilson_batch(*srw.arrays(), dummy, in_tree, False, in_tree, _order_indices(F, order), seeds)


def wilson_finite(F: FiniteGraph, root: Label, seed: int, order: Sequence | None = None) -> OrientedTree:
    kind = "toward_wired_boundary" if root == F.boundary and root is not None else "toward_finite_root"
    return OrientedTree.from_successors(F, wilson_successors(F, root, 1, seed, order)[0], kind)


def wilson_h_successors(a: PotentialKernel, samples: int, seed: int, order: Sequence | None = None, stream: str = "wilson_h") -> np.ndarray:
    """Wilson's algorithm rooted at the boundary point of ``a``.

    The first branch is the loop erasure of the Doob walk from the root of
    ``a`` up to its first visit to a pole (its exit from the window); later
    branches are loop-erased simple walks stopped on hitting the tree.
    """
    F = a.graph
    o = a.root
    if order is None:
        order = [o] + [v for v in F.vertices if v != o]
    if order[0] != o:
        raise ValueError("vertex order must start at the root of the kernel")
    poles = set(a.pole or ()) | ({F.boundary} if F.boundary is not None else set())
    doob = doob_kernel(a, F)
    srw = srw_kernel(F)
    stop = _mask(F, poles)
    seeds = replica_seeds(seed, stream, samples)
    empty = np.zeros(len(F), dtype=np.bool_)
    return K.wilson_batch(*srw.arrays(), doob.cum, stop, True, empty, _order_indices(F, order), seeds)


def wilson_rooted_at_h(a: PotentialKernel, seed: int, order: Sequence | None = None) -> OrientedTree:
    return OrientedTree.from_successors(a.graph, wilson_h_successors(a, 1, seed, order)[0], "toward_h")


def tree_keys(F: FiniteGraph, succ: np.ndarray) -> list[tuple]:
    """Unoriented edge sets of successor arrays, as sorted index-pair tuples."""
    n = succ.shape[1]
    ar = np.arange(n)
    keys = []
    for row in succ:
        ok = row >= 0
        lo = np.minimum(ar[ok], row[ok])
        hi = np.maximum(ar[ok], row[ok])
        order = np.lexsort((hi, lo))
        keys.append(tuple(zip(lo[order].tolist(), hi[order].tolist())))
    return keys


def empirical_distribution(keys: Iterable[tuple]) -> dict:
    c = Counter(keys)
    tot = sum(c.values())
    return {k: v / tot for k, v in c.items()}


def total_variation(p: dict, q: dict) -> float:
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in set(p) | set(q))


def vertex_order_invariance_test(sampler, orders: Sequence[Sequence], samples: int, seed: int) -> dict:
    """Pairwise TV between tree laws produced by ``sampler(order, samples, seed)`` for several orders.

    ``sampler`` returns a list of tree keys. Each order uses its own stream.
    """
    if len(orders) < 2:
        raise ValueError("need at least two orders")
    dists = [empirical_distribution(sampler(o, samples, seed + 7919 * i)) for i, o in enumerate(orders)]
    tv = {}
    for i in range(len(orders)):
        for j in range(i + 1, len(orders)):
            tv[(i, j)] = total_variation(dists[i], dists[j])
    return {"tv": tv, "max_tv": max(tv.values()), "samples": samples}


# ---------------------------------------------------------------------------
# spines


@dataclass
class SpineProfile:
    vertices: list  # spine vertices left to right
    zero: int  # position of sigma^0(o)
    n: list = field(default_factory=list)
    a_r: list = field(default_factory=list)
    a_l: list = field(default_factory=list)
    M: list = field(default_factory=list)
    R_eff: list = field(default_factory=list)
    d: list = field(default_factory=list)
    cocycle_residual: float | None = None
    rerooting_residual: float | None = None
    n_plus: int | None = None
    n_minus: int | None = None

    def sigma(self, n: int) -> Label:
        i = self.zero + n
        if not 0 <= i < len(self.vertices):
            raise IndexError(f"sigma^{n}(o) lies outside the recorded spine")
        return self.vertices[i]

    def rows(self) -> list[dict]:
        return [dict(n=n, a_r=float(ar), a_l=float(al), M=float(m), R_eff=float(r), d=int(d)) for n, ar, al, m, r, d in zip(self.n, self.a_r, self.a_l, self.M, self.R_eff, self.d)]


def window_sides(F: FiniteGraph) -> tuple[list, list]:
    """Window vertices with an outside neighbour, split into the left and right ends."""
    fam, params = F.family, F.source.get("params", {})
    if fam not in G.TWO_ENDED:
        raise ValueError(f"family {fam!r} is not two-ended; no spine")
    left, right = [], []
    for v in F.vertices:
        if v == F.boundary or isinstance(v, tuple) and fam == "stretched_line":
            continue
        if any(w not in F for w in G.neighbours(fam, v, params)):
            x = v[0] if fam == "ladder" else v
            (left if x < 0 else right).append(v)
    return left, right


def spine_extract(tree: OrientedTree, o: Label | None = None) -> SpineProfile:
    """The tree path shared by all left-end to right-end paths of a free-window tree."""
    F = tree.graph
    if F.family not in G.TWO_ENDED:
        raise ValueError(f"family {F.family!r} is one-ended; spine extraction refused")
    o = G.origin(F.family) if o is None else o
    left, right = window_sides(F)
    if not left or not right:
        raise ValueError("window has no two ends")
    base = tree.path(left[0], right[0])
    common = set(base)
    for l in left:
        for r in right:
            common &= set(tree.path(l, r))
    spine = [v for v in base if v in common]
    if not spine:
        raise ValueError("no common trunk between the ends; window too small")
    # sigma^0(o): o itself, else a spine vertex on o's cross-section, else the nearest one
    rung = cross_section(F.family, o)
    dist = [-2 if v == o else -1 if v in rung else G.graph_distance_from_origin(F.family, v) for v in spine]
    return SpineProfile(spine, int(np.argmin(dist)))


def canonical_spine(family: str, radius: int) -> SpineProfile:
    """Deterministic bi-infinite path through o: the integers, or the bottom rail of the ladder."""
    if family == "ladder":
        verts = [(x, 0) for x in range(-radius, radius + 1)]
    elif family in ("line", "stretched_line"):
        verts = list(range(-radius, radius + 1))
    else:
        raise ValueError(f"family {family!r} has no spine")
    return SpineProfile(verts, radius)


def _limit_window(family: str, params: dict, reach: int, tol: float) -> int:
    """Smallest schedule radius at which both directional kernels have converged on the spine span."""
    from .boundary import direction, radius_schedule

    r_spec = direction(family, "right", **params)
    targets = [G.end_vertex(family, "right", reach), G.end_vertex(family, "left", reach)]
    kr = potential_kernel_limit(r_spec, G.origin(family), targets, tol)
    kl = potential_kernel_limit(direction(family, "left", **params), G.origin(family), targets, tol)
    r = max(kr.radius, kl.radius)
    sched = radius_schedule(r_spec, reach)
    bigger = [s for s in sched if s >= 2 * reach + 2]
    return max(r, bigger[0] if bigger else sched[-1])


def spine_cocycle_profile(family: str, spine: SpineProfile, n_max: int, params: dict | None = None, tol: float = 1e-10, exact: bool = False) -> SpineProfile:
    """M_o(n) = a_r(s_n, o) - a_l(s_n, o) along the spine and the cocycle residual.

    Kernels rooted at every spine vertex are computed directly from the
    limit formula; the re-rooting identity
    a(x,o) - a(y,o) = a(x,y) - G_y(x,o)/deg(o) is checked alongside.
    """
    from .boundary import direction

    params = dict(params or {})
    for n in (-n_max, n_max):
        spine.sigma(n)
    radius = _limit_window(family, params, 2 * n_max + 2, tol)
    ns = list(range(-n_max, n_max + 1))
    pts = [spine.sigma(n) for n in ns]
    o = spine.sigma(0)
    kern = {}
    graph = None
    for side in ("right", "left"):
        F, pole = window_and_pole(direction(family, side, **params), radius)
        graph = F
        for y in pts:
            kern[(side, y)] = kernel_on_window(F, pole, y, exact)
    F = graph
    Mtab = {y: {x: kern[("right", y)][x] - kern[("left", y)][x] for x in pts} for y in pts}
    # cocycle M_o(n+m) = M_o(n) + M_n(n+m), for |n|, |m| <= n_max within the recorded span
    worst = 0.0
    for i, n in enumerate(ns):
        for m in range(-n_max, n_max + 1):
            if -n_max <= n + m <= n_max:
                x, y = spine.sigma(n + m), spine.sigma(n)
                worst = max(worst, abs(float(Mtab[o][x] - Mtab[o][y] - Mtab[y][x])))
    # re-rooting identity with Green solves on the same window
    reroot = 0.0
    for y in pts[:: max(1, len(pts) // 10)]:
        if y == o:
            continue
        gcol = green_column(F, y, o, exact)
        for x in pts:
            lhs = kern[("right", o)][x] - kern[("right", o)][y]
            rhs = kern[("right", y)][x] - gcol[F.idx(x)] / F.deg(o)
            reroot = max(reroot, abs(float(lhs - rhs)))
    res = resistances_from(G.free_window(family, radius, params), o, pts, exact)
    spine.n = ns
    spine.a_r = [kern[("right", o)][x] for x in pts]
    spine.a_l = [kern[("left", o)][x] for x in pts]
    spine.M = [ar - al for ar, al in zip(spine.a_r, spine.a_l)]
    spine.R_eff = [res[x] for x in pts]
    spine.d = [_graph_distance(family, o, x) for x in pts]
    spine.cocycle_residual = worst
    spine.rerooting_residual = reroot
    spine.n_plus = _eventual(ns, spine.M, +1)
    spine.n_minus = _eventual(ns, spine.M, -1)
    return spine


def _eventual(ns, M, sign) -> int | None:
    """Smallest n+ with sign*M(n) > 0 for all n >= n+ (largest n- with M(n) < 0 for n <= n- when sign < 0)."""
    if sign > 0:
        best = None
        for n, m in sorted(zip(ns, M), reverse=True):
            if n <= 0 or m <= 0:
                break
            best = n
        return best
    best = None
    for n, m in sorted(zip(ns, M)):
        if n >= 0 or m >= 0:
            break
        best = n
    return best


def _graph_distance(family: str, u: Label, v: Label) -> int:
    if family == "line":
        return abs(u - v)
    if family == "ladder":
        return abs(u[0] - v[0]) + abs(u[1] - v[1])
    if family == "grid2d":
        return abs(u[0] - v[0]) + abs(u[1] - v[1])
    if not isinstance(u, tuple) and not isinstance(v, tuple):
        # shortest route: along the line, or through a stretch path for |u|, |v| <= N
        return abs(u - v)
    raise ValueError("distance to stretch-path vertices is not tabulated")


@dataclass
class SlopeReport:
    slopes: dict  # radius -> slope
    stability: float
    max_excess: float  # max (R_eff - d); must be <= 0
    profile: dict  # radius -> list of (n, R_eff, d)


def _lsq_slope(xs, ys):
    n = len(xs)
    exact = all(isinstance(y, (int, Fraction)) for y in ys)
    if exact:
        mx = Fraction(sum(xs), n)
        my = Fraction(sum(ys), n) if n else Fraction(0)
        num = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
        den = sum((x - mx) ** 2 for x in xs)
        return num / den
    return float(np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)[0])


def spine_resistance_slope(family: str, radii: Sequence[int], n_max: int, params: dict | None = None, spine: SpineProfile | None = None, exact: bool | None = None) -> SlopeReport:
    """Least-squares slope of R_eff(o <-> s_n) in n = 0..n_max on free windows of each radius."""
    if family not in G.TWO_ENDED:
        raise ValueError(f"family {family!r} is not two-ended")
    params = dict(params or {})
    slopes, prof, excess = {}, {}, -float("inf")
    for r in radii:
        if r < n_max:
            raise ValueError("window radius must be at least n_max")
        sp = spine or canonical_spine(family, r)
        pts = [sp.sigma(n) for n in range(n_max + 1)]
        F = G.free_window(family, r, params)
        ex = (len(F) <= 200) if exact is None else exact
        o = pts[0]
        res = resistances_from(F, o, pts, ex)
        d = [_graph_distance(family, o, x) for x in pts]
        ys = [res[x] for x in pts]
        slopes[r] = _lsq_slope(list(range(n_max + 1)), ys)
        prof[r] = list(zip(range(n_max + 1), ys, d))
        excess = max(excess, max(float(y) - dd for y, dd in zip(ys, d)))
    top = sorted(slopes)[-2:]
    stab = abs(float(slopes[top[-1]]) - float(slopes[top[0]])) / abs(float(slopes[top[-1]])) if len(top) == 2 else 0.0
    return SlopeReport(slopes, stab, excess, prof)


# ---------------------------------------------------------------------------
# past reach and ends


def past_reaches(nxt: np.ndarray, starts: np.ndarray, target: int) -> bool:
    for s in starts:
        u = s
        while u >= 0:
            if u == target:
                return True
            u = nxt[u]
    return False


@dataclass
class PastReachRow:
    radius: int
    probability: float
    se: float
    replicas: int


def past_reach_profile(radii: Sequence[int], replicas: int, seed: int, family: str = "grid2d") -> list[PastReachRow]:
    """P(past of o in the wired tree contains a vertex at distance r), per radius."""
    out = []
    for r in radii:
        F = G.wired_truncation(family, {}, r)
        o = G.origin(family)
        far = [v for v, _ in F.neighbours(F.boundary)]
        order = [o] + far
        succ = wilson_successors(F, F.boundary, replicas, seed, order, stream=f"past_reach:{r}")
        starts = np.array([F.idx(v) for v in far], dtype=np.int64)
        io = F.idx(o)
        hits = np.array([past_reaches(row, starts[starts != io], io) for row in succ])
        p = hits.mean()
        out.append(PastReachRow(r, float(p), float(np.sqrt(p * (1 - p) / replicas)), replicas))
    return out


def cross_section(family: str, o: Label) -> set:
    """Vertices sharing o's position along the family: the rung on the ladder, else {o}."""
    if family == "ladder":
        return {(o[0], 0), (o[0], 1)}
    return {o}


def ends_proxy(tree: OrientedTree, o: Label | None = None, core: Iterable | None = None) -> int:
    """2 if at least two tree branches leave the core and reach the window edge, else 1.

    Branches are the components of the tree minus the core (and minus the
    wired vertex) joined to the core by a tree edge. The default core is
    the cross-section of o.
    """
    F = tree.graph
    fam, params = F.family, F.source.get("params", {})
    o = G.origin(fam) if o is None else o
    core = cross_section(fam, o) if core is None else set(core)
    edge_of_window = {v for v in F.vertices if v != F.boundary and any(w not in F for w in G.neighbours(fam, v, params))}
    adj: dict = {v: [] for v in F.vertices}
    for v, p in tree.parent.items():
        if p is not None:
            adj[v].append(p)
            adj[p].append(v)
    blocked = core | {F.boundary}
    seen: set = set()
    reaching = 0
    for c in core:
        for s in adj[c]:
            if s in blocked or s in seen:
                continue
            comp, frontier, hit = {s}, [s], False
            while frontier:
                u = frontier.pop()
                hit |= u in edge_of_window
                for w in adj[u]:
                    if w not in blocked and w not in comp:
                        comp.add(w)
                        frontier.append(w)
            seen |= comp
            reaching += hit
    return 2 if reaching >= 2 else 1
