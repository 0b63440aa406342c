"""Hybrid SAT solving: gradient descent over candidate assignments, then seeded CDCL."""

from .cdcl import Budget, SolveOutcome, Status, solve
from .cnf import CnfFormula, Literal, Model, count_satisfied_clauses, parse_dimacs, read_dimacs, verify_model
from .confidence import PartialAssignment, compute_k, extract
from .encoding import ProblemMatrix, encode_problem, spmm_forward, spmm_transpose
from .grad import OptimizerConfig, run_gradient_phase
from .orchestrator import HybridConfig, HybridResult, dispatch_plan, solve_hybrid

__all__ = [
    "Budget", "SolveOutcome", "Status", "solve",
    "CnfFormula", "Literal", "Model", "count_satisfied_clauses", "parse_dimacs",
    "read_dimacs", "verify_model",
    "PartialAssignment", "compute_k", "extract",
    "ProblemMatrix", "encode_problem", "spmm_forward", "spmm_transpose",
    "OptimizerConfig", "run_gradient_phase",
    "HybridConfig", "HybridResult", "dispatch_plan", "solve_hybrid",
]

__version__ = "0.1.0"
