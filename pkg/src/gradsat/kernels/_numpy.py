"""Vectorized numpy implementations of the hot kernels."""

import numpy as np


def spmm_forward(row_offsets, col_indices, A):
    starts = row_offsets[:-1]
    out = np.zeros((len(starts), A.shape[1]), dtype=np.int64)
    # reduceat misreads empty segments, so only sum the non-empty rows;
    # empty rows own no entries and do not shift the segment boundaries
    nonempty = row_offsets[1:] > starts
    if nonempty.any():
        out[nonempty] = np.add.reduceat(A[col_indices], starts[nonempty], axis=0, dtype=np.int64)
    return out


def spmm_transpose(row_offsets, col_indices, G, n_cols):
    out = np.zeros((n_cols, G.shape[1]), dtype=np.float64)
    rows = np.repeat(np.arange(len(row_offsets) - 1), np.diff(row_offsets))
    # np.add.at accumulates in nnz order, the same order as the loop kernel
    np.add.at(out, col_indices, G[rows])
    return out


def smooth_min_columns(R, tau):
    R = np.asarray(R, dtype=np.float64)
    z = -tau * (R - R.min(axis=0))
    w = np.exp(z)
    w /= w.sum(axis=0)
    return (w * R).sum(axis=0)


def smooth_min_grad(R, tau):
    """Column smooth-min values and their derivative with respect to R."""
    R = np.asarray(R, dtype=np.float64)
    z = -tau * (R - R.min(axis=0))
    w = np.exp(z)
    w /= w.sum(axis=0)
    S = (w * R).sum(axis=0)
    dS = w * (1.0 - tau * (R - S))
    return S, dS


def smooth_min_grad_int(R, tau):
    R = np.asarray(R, dtype=np.int64)
    shifted = R - R.min(axis=0)
    table = np.exp(-tau * np.arange(shifted.max() + 1, dtype=np.float64))
    w = table[shifted]
    w /= w.sum(axis=0)
    S = (w * R).sum(axis=0)
    dS = w * (1.0 - tau * (R - S))
    return S, dS
