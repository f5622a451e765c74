"""Compiled inner loops for lattice enumeration and point counting.

Pruning uses a floating point LDL^T decomposition with a safety margin, so
it can only admit extra candidates; every leaf is tested against the exact
integer norm, which keeps the counts exact.
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from numba import njit, prange

# numba probes for TBB on the first parallel launch and falls back quietly
# to another threading layer; only the notice is silenced.
warnings.filterwarnings("ignore", message="The TBB threading layer")


@njit(cache=True)
def _bounds(c, rem, qii, eps):
    if rem < 0.0:
        rem = 0.0
    r = math.sqrt(rem / qii)
    lo = math.ceil(c - r - eps)
    hi = math.floor(c + r + eps)
    return lo, hi


@njit(cache=True)
def _enum_from(A, L, qd, N, top, xtop, counts, eps):
    """Count vectors with x_j = 0 for j > top and x_top = xtop fixed.

    Norm f(x) = x^T A x / 2 = sum_i qd[i] (x_i + sum_{j>i} L[i, j] x_j)^2.
    """
    d = A.shape[0]
    x = np.zeros(d, dtype=np.int64)
    lo = np.zeros(d, dtype=np.int64)
    hi = np.zeros(d, dtype=np.int64)
    exact = np.zeros(d + 1, dtype=np.int64)  # exact norm of coordinates >= i
    rem = np.zeros(d + 1, dtype=np.float64)  # float budget left for levels < i
    cen = np.zeros(d, dtype=np.float64)

    x[top] = xtop
    t = xtop * xtop * (A[top, top] // 2)
    exact[top] = t
    rem[top] = N - qd[top] * xtop * xtop + eps
    if top == 0:
        if t <= N:
            counts[t] += 1
        return
    i = top - 1
    # set up level i
    c = 0.0
    for j in range(i + 1, top + 1):
        c -= L[i, j] * x[j]
    cen[i] = c
    lo[i], hi[i] = _bounds(c, rem[i + 1], qd[i], eps)
    x[i] = lo[i] - 1
    while True:
        if i == 0:
            # innermost coordinate: a tight loop on the exact quadratic
            s = 0
            for j in range(1, top + 1):
                s += A[0, j] * x[j]
            a0 = A[0, 0] // 2
            base = exact[1]
            for x0 in range(lo[0], hi[0] + 1):
                v = base + a0 * x0 * x0 + s * x0
                if v <= N:
                    counts[v] += 1
            i = 1
            if i > top - 1:
                return
            continue
        x[i] += 1
        if x[i] > hi[i]:
            i += 1
            if i > top - 1:
                return
            continue
        # accept x[i]: update exact norm and float budget, descend
        s = 0
        for j in range(i + 1, top + 1):
            s += A[i, j] * x[j]
        xi = x[i]
        # partial norm of the fixed coordinates (not a bound, just bookkeeping)
        exact[i] = exact[i + 1] + (A[i, i] // 2) * xi * xi + s * xi
        dlt = xi - cen[i]
        rem[i] = rem[i + 1] - qd[i] * dlt * dlt
        i -= 1
        c = 0.0
        for j in range(i + 1, top + 1):
            c -= L[i, j] * x[j]
        cen[i] = c
        lo[i], hi[i] = _bounds(c, rem[i + 1], qd[i], eps)
        x[i] = lo[i] - 1


@njit(cache=True, parallel=True)
def count_norms(A, L, qd, N, eps):
    """r(n) for 0 <= n <= N of the lattice with even Gram matrix A."""
    d = A.shape[0]
    total = np.zeros(N + 1, dtype=np.int64)
    total[0] = 1
    for top in range(d - 1, -1, -1):
        hi = int(math.floor(math.sqrt((N + eps) / qd[top]) + eps))
        if hi < 1:
            continue
        part = np.zeros((hi, N + 1), dtype=np.int64)
        for k in prange(hi):
            _enum_from(A, L, qd, N, top, k + 1, part[k], eps)
        for k in range(hi):
            for n in range(N + 1):
                total[n] += 2 * part[k, n]
    return total


@njit(cache=True)
def ap_odd(c2, c1, c0, p):
    """-sum_x kronecker(x^3 + c2 x^2 + c1 x + c0, p) for an odd prime p.

    The cubic is stepped by finite differences so the loop only adds.
    """
    isq = np.full(p, -1, dtype=np.int64)
    isq[0] = 0
    sq = 0
    for y in range(1, (p + 1) // 2):
        sq += 2 * y - 1
        if sq >= p:
            sq -= p
        isq[sq] = 1
    a2 = c2 % p
    v = c0 % p
    d1 = (1 + a2 + c1) % p
    d2 = (6 + 2 * a2) % p
    d3 = 6 % p
    s = 0
    for _ in range(p):
        s += isq[v]
        v += d1
        if v >= p:
            v -= p
        d1 += d2
        if d1 >= p:
            d1 -= p
        d2 += d3
        if d2 >= p:
            d2 -= p
    return -s


@njit(cache=True)
def ap_table(c2, c1, c0, primes):
    out = np.zeros(primes.shape[0], dtype=np.int64)
    for k in range(primes.shape[0]):
        out[k] = ap_odd(c2, c1, c0, primes[k])
    return out
