"""Loop kernels compiled with numba.

Sequential loops only: every reduction runs in a fixed order, so results
do not depend on thread scheduling.
"""

import numpy as np

from .._accel import njit


@njit(cache=True)
def spmm_forward(row_offsets, col_indices, A):
    n_rows = row_offsets.shape[0] - 1
    n = A.shape[1]
    R = np.zeros((n_rows, n), dtype=np.int64)
    for r in range(n_rows):
        for p in range(row_offsets[r], row_offsets[r + 1]):
            c = col_indices[p]
            for i in range(n):
                R[r, i] += A[c, i]
    return R


@njit(cache=True)
def spmm_transpose(row_offsets, col_indices, G, n_cols):
    n_rows = row_offsets.shape[0] - 1
    n = G.shape[1]
    out = np.zeros((n_cols, n), dtype=np.float64)
    for r in range(n_rows):
        for p in range(row_offsets[r], row_offsets[r + 1]):
            c = col_indices[p]
            for i in range(n):
                out[c, i] += G[r, i]
    return out


@njit(cache=True)
def _softmin(R, tau):
    # row-major passes; returns unnormalized weights, column sums and smooth-min values
    C, N = R.shape
    lo = R[0].copy()
    for j in range(1, C):
        for i in range(N):
            if R[j, i] < lo[i]:
                lo[i] = R[j, i]
    w = np.empty((C, N), dtype=np.float64)
    total = np.zeros(N, dtype=np.float64)
    S = np.zeros(N, dtype=np.float64)
    for j in range(C):
        for i in range(N):
            e = np.exp(-tau * (R[j, i] - lo[i]))
            w[j, i] = e
            total[i] += e
            S[i] += e * R[j, i]
    for i in range(N):
        S[i] /= total[i]
    return w, total, S


@njit(cache=True)
def smooth_min_columns(R, tau):
    return _softmin(R, tau)[2]


@njit(cache=True)
def smooth_min_grad(R, tau):
    C, N = R.shape
    w, total, S = _softmin(R, tau)
    dS = np.empty((C, N), dtype=np.float64)
    for j in range(C):
        for i in range(N):
            dS[j, i] = w[j, i] / total[i] * (1.0 - tau * (R[j, i] - S[i]))
    return S, dS


@njit(cache=True)
def smooth_min_grad_int(R, tau):
    """Integer R: exponentials come from a table indexed by R - column min."""
    C, N = R.shape
    lo = R[0].copy()
    hi = R[0, 0]
    for j in range(C):
        for i in range(N):
            x = R[j, i]
            if x < lo[i]:
                lo[i] = x
            if x > hi:
                hi = x
    span = hi - lo.min() + 1
    table = np.empty(span, dtype=np.float64)
    for d in range(span):
        table[d] = np.exp(-tau * d)
    total = np.zeros(N, dtype=np.float64)
    S = np.zeros(N, dtype=np.float64)
    for j in range(C):
        for i in range(N):
            e = table[R[j, i] - lo[i]]
            total[i] += e
            S[i] += e * R[j, i]
    for i in range(N):
        S[i] /= total[i]
    dS = np.empty((C, N), dtype=np.float64)
    for j in range(C):
        for i in range(N):
            d = R[j, i] - lo[i]
            dS[j, i] = table[d] / total[i] * (1.0 - tau * (R[j, i] - S[i]))
    return S, dS
