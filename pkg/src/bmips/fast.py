"""Compiled kernels: tree-frontier improved screening and alias-table build.

The screening kernel is the production path behind QueryContext
(engine="compiled"). It reimplements the selection-tree improved screen of
`query` on flat arrays with identical arithmetic (float64 products of the
float32 stored values) and identical tie handling, so its output is
bit-for-bit the reference output; the test suite asserts exact equality on
randomized instances. All scratch arrays are owned by the caller's context,
keeping repeated queries allocation-free.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .matrix import as_query

NEG_INF = -np.inf


@njit(cache=True, nogil=True)
def _screen_tree(sorted_idx, values, w, B, ptrs, tree_z, tree_t, visited, out):
    k, n = sorted_idx.shape
    kbar = tree_z.shape[0] // 2

    for i in range(2 * kbar):
        tree_z[i] = NEG_INF
        tree_t[i] = -1
    for t in range(k):
        ptrs[t] = 0
        if w[t] > 0.0:
            j = sorted_idx[t, 0]
        else:
            j = sorted_idx[t, n - 1]
        tree_z[kbar + t] = np.float64(values[j, t]) * w[t]
        tree_t[kbar + t] = t
    for i in range(kbar - 1, 0, -1):
        l = 2 * i
        r = l + 1
        if tree_z[l] > tree_z[r] or (tree_z[l] == tree_z[r] and tree_t[l] < tree_t[r]):
            tree_z[i] = tree_z[l]
            tree_t[i] = tree_t[l]
        else:
            tree_z[i] = tree_z[r]
            tree_t[i] = tree_t[r]

    out_len = 0
    pops = 0
    advances = 0
    while out_len < B:
        t = tree_t[1]
        if t < 0:  # all cursors retired; unreachable for B <= n
            break
        pops += 1
        fwd = w[t] > 0.0
        p = ptrs[t]
        if fwd:
            j = sorted_idx[t, p]
        else:
            j = sorted_idx[t, n - 1 - p]
        if visited[j] == 0:
            visited[j] = 1
            out[out_len] = j
            out_len += 1
        new_z = NEG_INF
        while ptrs[t] < n - 1:
            ptrs[t] += 1
            advances += 1
            p = ptrs[t]
            if fwd:
                j2 = sorted_idx[t, p]
            else:
                j2 = sorted_idx[t, n - 1 - p]
            if visited[j2] == 0:
                new_z = np.float64(values[j2, t]) * w[t]
                break
        i = kbar + t
        tree_z[i] = new_z
        while i > 1:
            i >>= 1
            l = 2 * i
            r = l + 1
            if tree_z[l] > tree_z[r] or (tree_z[l] == tree_z[r] and tree_t[l] < tree_t[r]):
                tree_z[i] = tree_z[l]
                tree_t[i] = tree_t[l]
            else:
                tree_z[i] = tree_z[r]
                tree_t[i] = tree_t[r]

    for i in range(out_len):
        visited[out[i]] = 0
    return out_len, pops, advances


def screen_improved_compiled(ctx, w, B: int) -> np.ndarray:
    """Run the kernel on a QueryContext's scratch; mirrors _screen_improved_py."""
    wq = as_query(w, ctx.k)
    out_len, pops, advances = _screen_tree(
        ctx.index.sorted_idx, ctx.index.matrix.values, wq, B,
        ctx.ptrs, ctx.tree_z, ctx.tree_t, ctx.visited, ctx.out)
    ctx.out_len = int(out_len)
    ctx.pop_count = int(pops)
    ctx.advance_count = int(advances)
    ctx.emission_count = ctx.pop_count + ctx.advance_count
    return ctx.out[:ctx.out_len].copy()


@njit(cache=True, nogil=True)
def _build_alias(values, prob, alias, small, large, col_weight):
    """Vose alias tables, one per dimension, over |values[:,t]| / col_weight[t].

    All-zero columns get col_weight 0 and self-aliasing rows; callers must
    never draw from them.
    """
    n, k = values.shape
    for t in range(k):
        c = 0.0
        for j in range(n):
            c += abs(np.float64(values[j, t]))
        col_weight[t] = c
        if c == 0.0:
            for j in range(n):
                prob[t, j] = 0.0
                alias[t, j] = j
            continue
        ns = 0
        nl = 0
        for j in range(n):
            p = abs(np.float64(values[j, t])) * n / c
            prob[t, j] = p
            if p < 1.0:
                small[ns] = j
                ns += 1
            else:
                large[nl] = j
                nl += 1
        while ns > 0 and nl > 0:
            s = small[ns - 1]
            ns -= 1
            g = large[nl - 1]
            nl -= 1
            alias[t, s] = g
            prob[t, g] = (prob[t, g] + prob[t, s]) - 1.0
            if prob[t, g] < 1.0:
                small[ns] = g
                ns += 1
            else:
                large[nl] = g
                nl += 1
        while nl > 0:
            g = large[nl - 1]
            nl -= 1
            prob[t, g] = 1.0
            alias[t, g] = g
        while ns > 0:
            s = small[ns - 1]
            ns -= 1
            prob[t, s] = 1.0
            alias[t, s] = s


def build_alias_tables(values_f32: np.ndarray):
    """Returns (prob, alias, col_weight) for an (n, k) float32 matrix."""
    n, k = values_f32.shape
    prob = np.empty((k, n), dtype=np.float64)
    alias = np.empty((k, n), dtype=np.int64)
    small = np.empty(n, dtype=np.int64)
    large = np.empty(n, dtype=np.int64)
    col_weight = np.empty(k, dtype=np.float64)
    _build_alias(values_f32, prob, alias, small, large, col_weight)
    return prob, alias, col_weight
