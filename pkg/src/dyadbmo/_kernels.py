"""Compiled inner loops for the grid scans.

Everything here works on integers: positions are multiples of 1/Q and values
multiples of 1/V, so all sums are exact int64 arithmetic.  Callers check the
magnitude budget before calling in.
"""
from __future__ import annotations

import warnings

import numpy as np
from numba import njit, prange
from numba.core.errors import NumbaWarning

# old system TBB; numba falls back to the omp/workqueue layer on its own
warnings.filterwarnings("ignore", message="The TBB threading layer", category=NumbaWarning)


@njit(cache=True)
def _seg_start(xs, a):
    # index j with xs[j] <= a < xs[j+1]
    lo, hi = 0, xs.shape[0] - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if xs[mid] <= a:
            lo = mid
        else:
            hi = mid
    return lo


@njit(cache=True)
def _arc_sums(xs, ws, a, b):
    s = 0
    j = _seg_start(xs, a)
    while j < ws.shape[0] and xs[j] < b:
        lo = xs[j] if xs[j] > a else a
        hi = xs[j + 1] if xs[j + 1] < b else b
        if hi > lo:
            s += (hi - lo) * ws[j]
        j += 1
    return s


@njit(cache=True)
def _arc_dev(xs, ws, a, b, length, s):
    t = 0
    j = _seg_start(xs, a)
    while j < ws.shape[0] and xs[j] < b:
        lo = xs[j] if xs[j] > a else a
        hi = xs[j + 1] if xs[j + 1] < b else b
        if hi > lo:
            d = length * ws[j] - s
            if d < 0:
                d = -d
            t += (hi - lo) * d
        j += 1
    return t


@njit(parallel=True, cache=True)
def arc_deviation_matrix(xs, ws, grid, q):
    """T[i, s-1] = sum over segments of overlap * |L*w - S| for the arc from
    grid[i] spanning s grid steps (s = G is the full circle).

    ``xs``/``ws`` describe the function on the doubled circle [0, 2Q].
    """
    g = grid.shape[0]
    out = np.empty((g, g), dtype=np.int64)
    for i in prange(g):
        a = grid[i]
        for s in range(1, g + 1):
            if s == g:
                b = a + q
            elif i + s < g:
                b = grid[i + s]
            else:
                b = grid[i + s - g] + q
            length = b - a
            sm = _arc_sums(xs, ws, a, b)
            out[i, s - 1] = _arc_dev(xs, ws, a, b, length, sm)
    return out


@njit(cache=True)
def _box_overlaps(xs, a, b, idx, lens):
    n = 0
    j = _seg_start(xs, a)
    while j < xs.shape[0] - 1 and xs[j] < b:
        lo = xs[j] if xs[j] > a else a
        hi = xs[j + 1] if xs[j + 1] < b else b
        if hi > lo:
            idx[n] = j
            lens[n] = hi - lo
            n += 1
        j += 1
    return n


@njit(parallel=True, cache=True)
def cube_deviation_tensor(xs0, xs1, w, grid0, grid1, sides):
    """2-d analogue of :func:`arc_deviation_matrix` for squares.

    ``w[j0, j1]`` is the value on the product of doubled-axis segments
    ``j0`` and ``j1``.  Output ``T[i, j, k]`` for the square with corner
    ``(grid0[i], grid1[j])`` and side ``sides[k]``.
    """
    g0, g1, ns = grid0.shape[0], grid1.shape[0], sides.shape[0]
    out = np.empty((g0, g1, ns), dtype=np.int64)
    for i in prange(g0):
        idx0 = np.empty(xs0.shape[0], dtype=np.int64)
        len0 = np.empty(xs0.shape[0], dtype=np.int64)
        idx1 = np.empty(xs1.shape[0], dtype=np.int64)
        len1 = np.empty(xs1.shape[0], dtype=np.int64)
        for j in range(g1):
            for k in range(ns):
                side = sides[k]
                n0 = _box_overlaps(xs0, grid0[i], grid0[i] + side, idx0, len0)
                n1 = _box_overlaps(xs1, grid1[j], grid1[j] + side, idx1, len1)
                vol = side * side
                s = 0
                for p in range(n0):
                    for r in range(n1):
                        s += len0[p] * len1[r] * w[idx0[p], idx1[r]]
                t = 0
                for p in range(n0):
                    for r in range(n1):
                        d = vol * w[idx0[p], idx1[r]] - s
                        if d < 0:
                            d = -d
                        t += len0[p] * len1[r] * d
                out[i, j, k] = t
    return out


@njit(cache=True)
def suffix_profile(ratio, smin):
    """For each query column q: max over rows i of max(ratio[i, smin[i, q]-1:]),
    with the row and step attaining it (first in row order, then step order)."""
    g, ncol = ratio.shape[0], smin.shape[1]
    suf = np.empty_like(ratio)
    arg = np.empty(ratio.shape, dtype=np.int64)
    for i in range(g):
        best = -1.0
        at = g - 1
        for s in range(g - 1, -1, -1):
            if ratio[i, s] >= best:
                best = ratio[i, s]
                at = s
            suf[i, s] = best
            arg[i, s] = at
    vals = np.empty(ncol, dtype=np.float64)
    rows = np.empty(ncol, dtype=np.int64)
    steps = np.empty(ncol, dtype=np.int64)
    for q in range(ncol):
        best = -1.0
        bi = 0
        for i in range(g):
            v = suf[i, smin[i, q] - 1]
            if v > best:
                best = v
                bi = i
        vals[q] = best
        rows[q] = bi
        steps[q] = arg[bi, smin[bi, q] - 1] + 1
    return vals, rows, steps


@njit(cache=True)
def match_sorted(values, targets):
    """Boolean mask of entries of ``values`` (2-d) present in sorted ``targets``."""
    out = np.zeros(values.shape, dtype=np.bool_)
    nt = targets.shape[0]
    for i in range(values.shape[0]):
        for j in range(values.shape[1]):
            x = values[i, j]
            lo, hi = 0, nt
            while lo < hi:
                mid = (lo + hi) // 2
                if targets[mid] < x:
                    lo = mid + 1
                else:
                    hi = mid
            if lo < nt and targets[lo] == x:
                out[i, j] = True
    return out
