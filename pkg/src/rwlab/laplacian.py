"""Green functions, hitting distributions, effective resistance and tree counts.

Every routine has a float backend (sparse LU, or AMG-preconditioned CG on
large graphs) and an exact backend over the rationals (FLINT matrices,
results returned as :class:`fractions.Fraction`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import flint
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graphs import FiniteGraph, Label

EXACT_LIMIT = 200
DIRECT_LIMIT = 10_000
CG_RTOL = 1e-12


def to_fraction(x) -> Fraction:
    return Fraction(int(x.p), int(x.q))


# ---------------------------------------------------------------------------
# measures and tables


@dataclass(frozen=True)
class VertexMeasure:
    """A probability mass function on a finite vertex list."""

    support: tuple
    mass: tuple
    exact: bool = False

    def __post_init__(self):
        if len(self.support) != len(self.mass):
            raise ValueError("support and mass lengths differ")
        if any(m < 0 for m in self.mass):
            raise ValueError("negative mass")

    def __getitem__(self, v):
        for u, m in zip(self.support, self.mass):
            if u == v:
                return m
        return Fraction(0) if self.exact else 0.0

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.mass))

    @property
    def total(self):
        return sum(self.mass, Fraction(0) if self.exact else 0.0)

    def sup_distance(self, other: "VertexMeasure") -> float:
        keys = set(self.support) | set(other.support)
        return max((abs(float(self[k]) - float(other[k])) for k in keys), default=0.0)

    @classmethod
    def point_mass(cls, v, exact: bool = False) -> "VertexMeasure":
        return cls((v,), (Fraction(1) if exact else 1.0,), exact)

    @classmethod
    def mixture(cls, parts: Sequence[tuple[float, "VertexMeasure"]]) -> "VertexMeasure":
        acc: dict = {}
        exact = all(m.exact for _, m in parts) and all(isinstance(w, (int, Fraction)) for w, _ in parts)
        for w, m in parts:
            for u, p in zip(m.support, m.mass):
                acc[u] = acc.get(u, 0) + w * p
        return cls(tuple(acc), tuple(acc.values()), exact)


@dataclass(frozen=True)
class GreenTable:
    """G_z(x, y) for x, y != z: expected visits to y before hitting z, from x."""

    z: Label
    labels: tuple
    table: np.ndarray
    exact: bool = False

    def __call__(self, x, y):
        return self.table[self._pos[x], self._pos[y]]

    def __post_init__(self):
        object.__setattr__(self, "_pos", {v: i for i, v in enumerate(self.labels)})


# ---------------------------------------------------------------------------
# absorbed solvers


class _AbsorbedSolver:
    """Solves L_UU x = b where U is the complement of an absorbing set."""

    def __init__(self, F: FiniteGraph, absorbing: frozenset, exact: bool):
        if not absorbing:
            raise ValueError("absorbing set must be nonempty")
        for b in absorbing:
            F.idx(b)
        self.keep = np.array([i for i, v in enumerate(F.vertices) if v not in absorbing], dtype=np.int64)
        self.exact = exact
        lap = F.laplacian().tocsr()
        L_uu = lap[self.keep][:, self.keep]
        n = len(self.keep)
        if exact:
            if n > EXACT_LIMIT:
                raise ValueError(f"exact mode supports at most {EXACT_LIMIT} unknowns, got {n}")
            dense = L_uu.toarray().astype(np.int64)
            self.inverse = flint.fmpq_mat(n, n, [int(x) for x in dense.ravel()]).inv() if n else None
        elif n <= DIRECT_LIMIT:
            self.lu = spla.splu(L_uu.tocsc()) if n else None
            self.amg = None
        else:
            import pyamg

            self.lu = None
            self.L_uu = L_uu.tocsr()
            self.amg = pyamg.smoothed_aggregation_solver(self.L_uu).aspreconditioner(cycle="V")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Float solve for a (|U|,) or (|U|, k) right-hand side."""
        if self.lu is not None:
            return self.lu.solve(np.asarray(rhs, dtype=float))
        if len(self.keep) == 0:
            return np.zeros_like(rhs, dtype=float)
        rhs = np.asarray(rhs, dtype=float)
        cols = rhs.reshape(len(self.keep), -1)
        out = np.empty_like(cols)
        for j in range(cols.shape[1]):
            x, info = spla.cg(self.L_uu, cols[:, j], rtol=CG_RTOL, M=self.amg, maxiter=5000)
            if info != 0:
                raise RuntimeError("conjugate gradient did not converge")
            out[:, j] = x
        return out.reshape(rhs.shape)

    def solve_exact(self, rhs_rows: list[list]) -> flint.fmpq_mat:
        n = len(self.keep)
        k = len(rhs_rows[0]) if rhs_rows else 0
        b = flint.fmpq_mat(n, k, [flint.fmpq(int(x.numerator), int(x.denominator)) if isinstance(x, Fraction) else int(x) for row in rhs_rows for x in row])
        return self.inverse * b


def _solver(F: FiniteGraph, absorbing: Iterable, exact: bool) -> _AbsorbedSolver:
    key = ("absorbed", frozenset(absorbing), bool(exact))
    cache = F._cache
    if key not in cache:
        cache[key] = _AbsorbedSolver(F, key[1], exact)
    return cache[key]


def _fmpq_to_array(m: flint.fmpq_mat) -> np.ndarray:
    out = np.empty((m.nrows(), m.ncols()), dtype=object)
    for i in range(m.nrows()):
        for j in range(m.ncols()):
            out[i, j] = to_fraction(m[i, j])
    return out


# ---------------------------------------------------------------------------
# public operations


def hitting_matrix(F: FiniteGraph, B: Iterable, exact: bool = False) -> tuple[tuple, np.ndarray]:
    """Matrix H with H[v, b] = P_v(X_{T_B} = b) for every vertex v of F.

    Rows follow ``F.vertices``; columns follow the returned target tuple.
    """
    targets = tuple(dict.fromkeys(B))
    if not targets:
        raise ValueError("target set B must be nonempty")
    s = _solver(F, targets, exact)
    cols = np.array([F.idx(b) for b in targets])
    A_ub = F.adjacency[s.keep][:, cols].toarray()
    n = len(F)
    if exact:
        H = np.empty((n, len(targets)), dtype=object)
        H[:] = Fraction(0)
        if len(s.keep):
            H[s.keep] = _fmpq_to_array(s.solve_exact(A_ub.tolist()))
        for j, c in enumerate(cols):
            H[c, j] = Fraction(1)
        return targets, H
    H = np.zeros((n, len(targets)))
    if len(s.keep):
        H[s.keep] = s.solve(A_ub.astype(float)).reshape(len(s.keep), -1)
    H[cols, np.arange(len(targets))] = 1.0
    return targets, H


def hitting_distribution(F: FiniteGraph, v: Label, B: Iterable, exact: bool = False) -> VertexMeasure:
    """Law of X_{T_B} for the walk started at v (point mass when v is in B)."""
    targets = tuple(dict.fromkeys(B))
    if not targets:
        raise ValueError("target set B must be nonempty")
    if v in targets:
        return VertexMeasure.point_mass(v, exact)
    targets, H = hitting_matrix(F, targets, exact)
    row = H[F.idx(v)]
    if not exact:
        row = np.clip(row, 0.0, None)
    return VertexMeasure(targets, tuple(row.tolist()), exact)


def hitting_probability(F: FiniteGraph, v: Label, x: Label, y: Label, exact: bool = False):
    """P_v(T_x < T_y)."""
    if x == y:
        raise ValueError("x and y must differ")
    _, H = hitting_matrix(F, (x, y), exact)
    return H[F.idx(v), 0]


def green_function(F: FiniteGraph, z: Label, exact: bool = False) -> GreenTable:
    F.idx(z)
    s = _solver(F, (z,), exact)
    deg = F.degree[s.keep]
    labels = tuple(F.vertices[i] for i in s.keep)
    if exact:
        inv = _fmpq_to_array(s.inverse)
        return GreenTable(z, labels, inv * deg[None, :].astype(object), True)
    n = len(s.keep)
    inv = s.solve(np.eye(n))
    return GreenTable(z, labels, inv * deg[None, :], False)


def green_column(F: FiniteGraph, z: Label, y: Label, exact: bool = False) -> np.ndarray:
    """G_z(., y) over all vertices of F (zero at z)."""
    if y == z:
        return np.zeros(len(F), dtype=object if exact else float) + (Fraction(0) if exact else 0.0)
    s = _solver(F, (z,), exact)
    pos = int(np.searchsorted(s.keep, F.idx(y)))
    e = np.zeros(len(s.keep))
    e[pos] = F.deg(y)
    if exact:
        out = np.empty(len(F), dtype=object)
        out[:] = Fraction(0)
        out[s.keep] = _fmpq_to_array(s.solve_exact(e.astype(np.int64).reshape(-1, 1).tolist()))[:, 0]
        return out
    out = np.zeros(len(F))
    out[s.keep] = s.solve(e)
    return out


def effective_resistance(F: FiniteGraph, x: Label, y: Label, exact: bool = False):
    """R_eff(x <-> y) = G_x(y, y) / deg(y) with unit conductances."""
    if x == y:
        raise ValueError("effective resistance needs distinct endpoints")
    return green_column(F, x, y, exact)[F.idx(y)] / F.deg(y)


def resistances_from(F: FiniteGraph, o: Label, targets: Iterable, exact: bool = False) -> dict:
    """R_eff(o <-> x) for each target x, sharing one factorisation."""
    targets = [t for t in dict.fromkeys(targets)]
    s = _solver(F, (o,), exact)
    pos = {F.vertices[i]: k for k, i in enumerate(s.keep)}
    out = {}
    rest = [t for t in targets if t != o]
    if exact:
        for t in rest:
            out[t] = to_fraction(s.inverse[pos[t], pos[t]])
    elif rest:
        E = np.zeros((len(s.keep), len(rest)))
        for j, t in enumerate(rest):
            E[pos[t], j] = 1.0
        X = s.solve(E).reshape(len(s.keep), -1)
        for j, t in enumerate(rest):
            out[t] = float(X[pos[t], j])
    if o in targets:
        out[o] = Fraction(0) if exact else 0.0
    return {t: out[t] for t in targets}


def apply_laplacian(F: FiniteGraph, f: np.ndarray) -> np.ndarray:
    """(Delta f)(x) = deg(x) f(x) - sum_{y ~ x} f(y), multiplicities included."""
    f = np.asarray(f)
    if f.dtype == object:
        A = F.adjacency
        out = np.empty(len(F), dtype=object)
        for i in range(len(F)):
            lo, hi = A.indptr[i], A.indptr[i + 1]
            out[i] = int(F.degree[i]) * f[i] - sum((int(m) * f[j] for j, m in zip(A.indices[lo:hi], A.data[lo:hi])), Fraction(0))
        return out
    return F.degree * f - F.adjacency @ f


def _reduced_laplacian_det(vertices: Sequence, edges: Iterable[tuple]) -> int:
    index = {v: i for i, v in enumerate(vertices)}
    n = len(vertices)
    if n == 1:
        return 1
    L = np.zeros((n, n), dtype=np.int64)
    for u, v, m in edges:
        i, j = index[u], index[v]
        L[i, j] -= m
        L[j, i] -= m
        L[i, i] += m
        L[j, j] += m
    R = L[1:, 1:]
    return int(flint.fmpz_mat(n - 1, n - 1, [int(x) for x in R.ravel()]).det())


def spanning_tree_count(F: FiniteGraph) -> int:
    """Number of spanning trees (matrix-tree theorem, exact integer determinant)."""
    if len(F) > EXACT_LIMIT:
        raise ValueError(f"exact tree counts support at most {EXACT_LIMIT} vertices")
    return _reduced_laplacian_det(F.vertices, F.edges)


class _UnionFind:
    def __init__(self, items):
        self.parent = {v: v for v in items}

    def find(self, v):
        while self.parent[v] != v:
            self.parent[v] = self.parent[self.parent[v]]
            v = self.parent[v]
        return v

    def union(self, u, v) -> bool:
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            return False
        self.parent[rv] = ru
        return True


def contract(F: FiniteGraph, edge_list: Iterable[tuple]) -> tuple[list, list]:
    """Contract the listed edges; returns (class representatives, multiedges), loops dropped."""
    uf = _UnionFind(F.vertices)
    for e in edge_list:
        u, v = e[0], e[1]
        if u not in F or v not in F or u == v or F.multiplicity(u, v) == 0:
            raise ValueError(f"edge {(u, v)!r} is not an edge of the graph")
        if not uf.union(u, v):
            raise ValueError("edge list contains a cycle")
    reps = list(dict.fromkeys(uf.find(v) for v in F.vertices))
    acc: dict = {}
    for u, v, m in F.edges:
        a, b = uf.find(u), uf.find(v)
        if a == b:
            continue
        key = (a, b) if reps.index(a) < reps.index(b) else (b, a)
        acc[key] = acc.get(key, 0) + m
    return reps, [(a, b, m) for (a, b), m in acc.items()]


def forest_inclusion_probability(F: FiniteGraph, edge_list: Iterable[tuple]) -> Fraction:
    """Probability that the uniform spanning tree contains every listed edge.

    For a parallel edge the listed pair names one specific copy.
    """
    edge_list = list(edge_list)
    if len(F) > EXACT_LIMIT:
        raise ValueError(f"exact tree counts support at most {EXACT_LIMIT} vertices")
    reps, edges = contract(F, edge_list)
    # a listed edge of multiplicity m names one specific copy; the others become loops
    return Fraction(_reduced_laplacian_det(reps, edges), spanning_tree_count(F))
