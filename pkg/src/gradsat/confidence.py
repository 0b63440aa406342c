"""Select the most confident variables of the best candidate assignments."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .grad import GradSnapshot


@dataclass(frozen=True)
class PartialAssignment:
    """(variable, value) pairs, most confident first; variables are 1-indexed."""

    pairs: tuple[tuple[int, bool], ...]
    source_column: int
    satisfied_count: int
    confidences: tuple[float, ...] = ()
    column_values: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        variables = [v for v, _ in self.pairs]
        if len(set(variables)) != len(variables):
            raise ValueError("duplicate variable in partial assignment")

    def __len__(self):
        return len(self.pairs)

    def literals(self) -> list[int]:
        return [v if val else -v for v, val in self.pairs]

    def prefix(self, n: int) -> "PartialAssignment":
        return PartialAssignment(self.pairs[:n], self.source_column, self.satisfied_count,
                                 self.confidences[:n], self.column_values)

    def to_json_obj(self) -> dict:
        return {"column": self.source_column, "sat_count": self.satisfied_count,
                "vars": [[v, bool(val)] for v, val in self.pairs]}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PartialAssignment":
        return cls(tuple((int(v), bool(val)) for v, val in obj["vars"]),
                   int(obj["column"]), int(obj["sat_count"]))


def compute_k(num_vars: int) -> int:
    """0.01% of the variables, rounded up, at least 20, at most all of them."""
    if num_vars < 1:
        raise ValueError("num_vars must be >= 1")
    return min(max(-(-num_vars // 10_000), 20), num_vars)


def rank_columns(sat_counts: np.ndarray) -> np.ndarray:
    """Column indices by descending satisfied count, ties to the lower index."""
    counts = np.asarray(sat_counts)
    return np.lexsort((np.arange(len(counts)), -counts))


def extract(snapshot: GradSnapshot, A: np.ndarray | None = None, num_requested: int = 1,
            use_normalized_grad: bool = False, k: int | None = None
            ) -> list[PartialAssignment]:
    """Partial assignments from the ``num_requested`` best columns.

    Confidence is the gradient magnitude: the k variables with the smallest
    |gradient| in a column are kept, with their binarized values. By default
    the per-variable gradient before the normalization Jacobian is used.
    """
    if num_requested < 1:
        raise ValueError("num_requested must be >= 1")
    A = snapshot.assignment if A is None else A
    grad = snapshot.grad_theta if use_normalized_grad else snapshot.grad_folded
    V, N = grad.shape
    k = compute_k(V) if k is None else min(k, V)
    values = A[0::2] == 1
    out = []
    for col in rank_columns(snapshot.hard_sat_counts)[:num_requested]:
        mag = np.abs(grad[:, col])
        order = np.lexsort((np.arange(V), mag))[:k]
        out.append(PartialAssignment(
            pairs=tuple((int(v) + 1, bool(values[v, col])) for v in order),
            source_column=int(col),
            satisfied_count=int(snapshot.hard_sat_counts[col]),
            confidences=tuple(float(x) for x in mag[order]),
            column_values=values[:, col].copy(),
        ))
    return out


def dump_partials(partials, path) -> None:
    with open(path, "w") as f:
        json.dump([p.to_json_obj() for p in partials], f, indent=1)
