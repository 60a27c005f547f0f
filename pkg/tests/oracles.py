"""Independent brute-force references used by the tests."""

import itertools
from fractions import Fraction

import numpy as np


def expand_edges(F):
    """One entry per parallel edge copy."""
    return [(u, v) for u, v, m in F.edges for _ in range(m)]


def spanning_trees(F):
    """All spanning trees as tuples of edge-copy indices, by subset enumeration."""
    edges = expand_edges(F)
    n = len(F)
    out = []
    for sub in itertools.combinations(range(len(edges)), n - 1):
        parent = {v: v for v in F.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for k in sub:
            a, b = find(edges[k][0]), find(edges[k][1])
            if a == b:
                ok = False
                break
            parent[a] = b
        if ok:
            out.append(sub)
    return edges, out


def inclusion_by_enumeration(F, pairs):
    """Fraction of trees containing the first copy of each listed vertex pair."""
    edges, trees = spanning_trees(F)
    first = [next(k for k, e in enumerate(edges) if set(e) == set(p)) for p in pairs]
    good = sum(all(k in t for k in first) for t in trees)
    return Fraction(good, len(trees))


def dense_green(F, z):
    """G_z(x, y) by dense inversion of (I - P) restricted to V minus z."""
    keep = [i for i, v in enumerate(F.vertices) if v != z]
    A = F.adjacency.toarray().astype(float)
    P = A / F.degree[:, None]
    Q = P[np.ix_(keep, keep)]
    return keep, np.linalg.inv(np.eye(len(keep)) - Q)


def dense_resistance(F, x, y):
    L = np.diag(F.degree.astype(float)) - F.adjacency.toarray()
    Lp = np.linalg.pinv(L)
    i, j = F.idx(x), F.idx(y)
    return Lp[i, i] + Lp[j, j] - 2 * Lp[i, j]
