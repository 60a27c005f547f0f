"""Compiled inner loops for walks and Wilson's algorithm.

Transition kernels are CSR arrays ``(indptr, indices, cum)`` where ``cum``
holds cumulative transition probabilities within each row. A row whose last
cumulative value is below one kills the walk with the missing mass. Each
replica reseeds the generator from its own seed, so results do not depend on
threading or on how replicas are batched.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

KILLED = -1
EXIT = -2
STOP_HIT, STOP_CAP, STOP_LEFT = 0, 1, 2


@njit(cache=True)
def step(indptr, indices, cum, x):
    lo = indptr[x]
    hi = indptr[x + 1]
    u = np.random.random()
    k = lo + np.searchsorted(cum[lo:hi], u, side="right")
    if k >= hi:
        return KILLED
    return indices[k]


@njit(cache=True)
def walk_path(indptr, indices, cum, start, stop_mask, exit_mask, min_steps, step_cap, seed):
    np.random.seed(seed)
    path = np.empty(step_cap + 1, dtype=np.int64)
    path[0] = start
    x = start
    n = 0
    reason = STOP_CAP
    if exit_mask[x]:
        return path[:1], STOP_LEFT
    if stop_mask[x] and min_steps == 0:
        return path[:1], STOP_HIT
    while n < step_cap:
        y = step(indptr, indices, cum, x)
        if y < 0:
            reason = STOP_LEFT
            break
        n += 1
        path[n] = y
        x = y
        if exit_mask[x]:
            reason = STOP_LEFT
            break
        if stop_mask[x] and n >= min_steps:
            reason = STOP_HIT
            break
    return path[: n + 1], reason


@njit(cache=True, parallel=True)
def hit_first(indptr, indices, cum, start, stop_mask, step_cap, seeds):
    """Vertex where each replica first enters ``stop_mask`` (-1 if censored)."""
    R = seeds.shape[0]
    out = np.full(R, -1, dtype=np.int64)
    for r in prange(R):
        np.random.seed(seeds[r])
        x = start
        for _ in range(step_cap):
            x = step(indptr, indices, cum, x)
            if x < 0:
                break
            if stop_mask[x]:
                out[r] = x
                break
    return out


@njit(cache=True, parallel=True)
def checkpoint_values(indptr, indices, cum, start, checkpoints, f, track, exit_mask, seeds):
    """Values f[:, X_n] at each checkpoint and min_{1<=t<=n} track[X_t].

    Replicas that are killed or reach ``exit_mask`` before a checkpoint get NaN there.
    """
    R = seeds.shape[0]
    C = checkpoints.shape[0]
    nf = f.shape[0]
    out = np.full((R, nf, C), np.nan)
    mins = np.full((R, C), np.nan)
    for r in prange(R):
        np.random.seed(seeds[r])
        x = start
        n = 0
        ci = 0
        m = np.inf
        while ci < C:
            y = step(indptr, indices, cum, x)
            if y < 0:
                break
            n += 1
            x = y
            if exit_mask[x]:
                break
            if track[x] < m:
                m = track[x]
            while ci < C and checkpoints[ci] == n:
                for j in range(nf):
                    out[r, j, ci] = f[j, x]
                mins[r, ci] = m
                ci += 1
    return out, mins


@njit(cache=True, parallel=True)
def visit_counts(indptr, indices, cum, start, mask, checkpoints, exit_mask, seeds):
    """Number of visits to ``mask`` during steps 1..n at each checkpoint (-1 if censored)."""
    R = seeds.shape[0]
    C = checkpoints.shape[0]
    out = np.full((R, C), -1, dtype=np.int64)
    for r in prange(R):
        np.random.seed(seeds[r])
        x = start
        n = 0
        ci = 0
        c = 0
        while ci < C:
            y = step(indptr, indices, cum, x)
            if y < 0:
                break
            n += 1
            x = y
            if exit_mask[x]:
                break
            if mask[x]:
                c += 1
            while ci < C and checkpoints[ci] == n:
                out[r, ci] = c
                ci += 1
    return out


@njit(cache=True, parallel=True)
def excursion_walk(indptr, indices, cum, start, in_b, jump_row, jump_cum, entry, target_col, n_targets, step_cap, seeds):
    """Walk inside a region B; each exit from B is replaced by an exact jump.

    On stepping to a vertex w outside B with ``jump_row[w] = i``, the next
    vertex is drawn from row i of ``jump_cum`` over ``entry`` (the law of the
    re-entry point into B); missing mass ends the walk for good.
    Returns hit flags per target column, the last vertex of B visited and a
    status (0 finished, 1 step cap).
    """
    R = seeds.shape[0]
    hits = np.zeros((R, n_targets), dtype=np.bool_)
    last = np.full(R, -1, dtype=np.int64)
    status = np.zeros(R, dtype=np.int64)
    for r in prange(R):
        np.random.seed(seeds[r])
        x = start
        if in_b[x]:
            last[r] = x
        if target_col[x] >= 0:
            hits[r, target_col[x]] = True
        n = 0
        done = False
        while not done:
            if n >= step_cap:
                status[r] = 1
                break
            y = step(indptr, indices, cum, x)
            n += 1
            if y < 0:
                break
            if not in_b[y]:
                i = jump_row[y]
                u = np.random.random()
                k = np.searchsorted(jump_cum[i], u, side="right")
                if k >= entry.shape[0]:
                    break
                y = entry[k]
            x = y
            last[r] = x
            if target_col[x] >= 0:
                hits[r, target_col[x]] = True
    return hits, last, status


@njit(cache=True)
def _wilson_one(indptr, indices, cum, first_cum, first_stop, use_first, in_tree0, order, nxt):
    n = in_tree0.shape[0]
    in_tree = in_tree0.copy()
    for v in range(n):
        nxt[v] = -1
    start = 0
    if use_first:
        o = order[0]
        u = o
        while not first_stop[u]:
            y = step(indptr, indices, first_cum, u)
            if y < 0:
                break
            nxt[u] = y
            u = y
        nxt[u] = EXIT
        u = o
        while True:
            in_tree[u] = True
            if nxt[u] == EXIT:
                break
            u = nxt[u]
        start = 1
    for t in range(start, order.shape[0]):
        v = order[t]
        u = v
        while not in_tree[u]:
            nxt[u] = step(indptr, indices, cum, u)
            u = nxt[u]
        u = v
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]


@njit(cache=True, parallel=True)
def wilson_batch(indptr, indices, cum, first_cum, first_stop, use_first, in_tree0, order, seeds):
    """Successor arrays of Wilson trees; roots keep -1, the exit vertex of the first branch gets -2."""
    R = seeds.shape[0]
    n = in_tree0.shape[0]
    out = np.empty((R, n), dtype=np.int64)
    for r in prange(R):
        np.random.seed(seeds[r])
        nxt = np.empty(n, dtype=np.int64)
        _wilson_one(indptr, indices, cum, first_cum, first_stop, use_first, in_tree0, order, nxt)
        out[r] = nxt
    return out
