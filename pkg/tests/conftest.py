import numpy as np
import pytest

from gradsat.cnf import parse_dimacs

FOUR_VAR_DIMACS = "p cnf 4 5\n1 2 0\n3 4 0\n-1 -3 0\n-2 4 0\n1 -4 0\n"
# satisfying assignment for the 4-variable / 5-clause example
FOUR_VAR_MODEL = [True, True, False, True]
# three candidate assignments (columns); the second is x1=x2=x3=T, x4=F and the
# third has x1=x3=F, which makes R[3,2]=0 and R[3,3]=2
FOUR_VAR_COLUMNS = [(1, 1, 0, 1), (1, 1, 1, 0), (0, 1, 0, 1)]


@pytest.fixture
def four_var():
    return parse_dimacs(FOUR_VAR_DIMACS)


@pytest.fixture
def four_var_A():
    """2V x N binary assignment matrix for FOUR_VAR_COLUMNS."""
    cols = np.array(FOUR_VAR_COLUMNS, dtype=np.uint8).T
    A = np.empty((8, 3), dtype=np.uint8)
    A[0::2] = cols
    A[1::2] = 1 - cols
    return A


def dense_incidence(formula):
    P = np.zeros((formula.num_clauses, 2 * formula.num_vars), dtype=np.int64)
    for r, clause in enumerate(formula.clauses):
        for lit in clause:
            P[r, 2 * (abs(lit) - 1) + (lit < 0)] = 1
    return P


def all_models(n):
    return ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(bool)
