"""Sparse clause-by-literal incidence matrix and its two products.

Column layout: variable v (1-indexed) owns columns 2(v-1) for its positive
literal and 2(v-1)+1 for its negative literal. Storage is row-compressed
with implicit unit values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .cnf import CnfFormula


def literal_column(lit: int) -> int:
    """Column of signed DIMACS literal ``lit``."""
    return 2 * (abs(lit) - 1) + (lit < 0)


@dataclass(frozen=True, eq=False)
class ProblemMatrix:
    num_clauses: int
    num_vars: int
    row_offsets: np.ndarray
    column_indices: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.num_clauses, 2 * self.num_vars

    @property
    def nnz(self) -> int:
        return int(self.row_offsets[-1])

    def row(self, r: int) -> np.ndarray:
        return self.column_indices[self.row_offsets[r]:self.row_offsets[r + 1]]

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.shape, dtype=np.int64)
        for r in range(self.num_clauses):
            dense[r, self.row(r)] = 1
        return dense

    def write_matrix_market(self, path) -> None:
        """Debug dump in Matrix Market coordinate pattern format (1-based)."""
        with open(path, "w") as f:
            f.write("%%MatrixMarket matrix coordinate pattern general\n")
            f.write(f"{self.num_clauses} {2 * self.num_vars} {self.nnz}\n")
            for r in range(self.num_clauses):
                for c in self.row(r):
                    f.write(f"{r + 1} {c + 1}\n")


def encode_problem(formula: CnfFormula) -> ProblemMatrix:
    offsets = np.zeros(formula.num_clauses + 1, dtype=np.int64)
    cols = []
    for r, clause in enumerate(formula.clauses):
        row = sorted({literal_column(lit) for lit in clause})
        cols.extend(row)
        offsets[r + 1] = offsets[r] + len(row)
    col_arr = np.asarray(cols, dtype=np.int64)
    offsets.setflags(write=False)
    col_arr.setflags(write=False)
    return ProblemMatrix(formula.num_clauses, formula.num_vars, offsets, col_arr)


def spmm_forward(P: ProblemMatrix, A: np.ndarray) -> np.ndarray:
    """R = P @ A for a binary 2V x N matrix A; integer result."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != 2 * P.num_vars:
        raise ValueError(f"A must have {2 * P.num_vars} rows, got shape {A.shape}")
    if A.dtype != np.uint8:
        A = A.astype(np.uint8)
    return kernels.spmm_forward(P.row_offsets, P.column_indices, A)


def spmm_transpose(P: ProblemMatrix, G: np.ndarray) -> np.ndarray:
    """P^T @ G for a real C x N matrix G."""
    G = np.asarray(G, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] != P.num_clauses:
        raise ValueError(f"G must have {P.num_clauses} rows, got shape {G.shape}")
    return kernels.spmm_transpose(P.row_offsets, P.column_indices, G, 2 * P.num_vars)
