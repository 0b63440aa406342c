"""Seeded random k-SAT instances, optionally with a planted solution."""

from __future__ import annotations

import numpy as np

from .cnf import CnfFormula, Model


def _random_clause(rng, num_vars, k):
    variables = rng.choice(num_vars, size=k, replace=False) + 1
    signs = rng.integers(0, 2, size=k) * 2 - 1
    return tuple(int(v * s) for v, s in zip(variables, signs))


def random_ksat(num_vars: int, num_clauses: int, k: int = 3, seed=None,
                name: str = "") -> CnfFormula:
    """Uniform random k-SAT: each clause has k distinct variables with random signs."""
    if k > num_vars:
        raise ValueError("k cannot exceed the number of variables")
    rng = np.random.default_rng(seed)
    clauses = [_random_clause(rng, num_vars, k) for _ in range(num_clauses)]
    return CnfFormula.from_clauses(num_vars, clauses, name)


def planted_ksat(num_vars: int, num_clauses: int, k: int = 3, seed=None,
                 name: str = "") -> tuple[CnfFormula, Model]:
    """Random k-SAT conditioned on satisfying a hidden uniform random model.

    Clauses falsified by the hidden model are rejected and redrawn.
    """
    if k > num_vars:
        raise ValueError("k cannot exceed the number of variables")
    rng = np.random.default_rng(seed)
    hidden = rng.integers(0, 2, size=num_vars).astype(bool)
    clauses = []
    while len(clauses) < num_clauses:
        clause = _random_clause(rng, num_vars, k)
        if any(hidden[abs(x) - 1] == (x > 0) for x in clause):
            clauses.append(clause)
    return CnfFormula.from_clauses(num_vars, clauses, name), Model(hidden)


def brute_force_models(formula: CnfFormula):
    """Yield every satisfying model by enumeration; for small formulas only."""
    n = formula.num_vars
    if n > 24:
        raise ValueError("enumeration limited to 24 variables")
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n)) & 1
    values = bits.astype(bool)
    ok = np.ones(len(values), dtype=bool)
    for clause in formula.clauses:
        sat = np.zeros(len(values), dtype=bool)
        for lit in clause:
            col = values[:, abs(lit) - 1]
            sat |= col if lit > 0 else ~col
        ok &= sat
    for row in values[ok]:
        yield Model(row)


def brute_force_sat(formula: CnfFormula) -> bool:
    return next(brute_force_models(formula), None) is not None
