"""DIMACS CNF parsing, the immutable formula type, and model checking.

Variables are 1-indexed in DIMACS text and in every public pair/literal
API; arrays indexed by variable (``Model.values``, numeric tensors) are
0-indexed.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)


class DimacsError(ValueError):
    """Raised for input that is not valid DIMACS CNF."""


@dataclass(frozen=True, order=True)
class Literal:
    variable: int
    polarity: bool = True

    def __post_init__(self):
        if self.variable < 1:
            raise ValueError(f"variable index must be >= 1, got {self.variable}")

    def __neg__(self) -> "Literal":
        return Literal(self.variable, not self.polarity)

    @classmethod
    def from_int(cls, lit: int) -> "Literal":
        if lit == 0:
            raise ValueError("0 is not a literal")
        return cls(abs(lit), lit > 0)

    def to_int(self) -> int:
        return self.variable if self.polarity else -self.variable

    def __repr__(self):
        return f"Literal({self.to_int()})"


@dataclass(frozen=True)
class CnfFormula:
    """Clause database. Clauses are tuples of signed DIMACS integers."""

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]
    source_name: str = ""
    tautologies: frozenset[int] = field(default=frozenset(), compare=False)

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        for ci, clause in enumerate(self.clauses):
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(
                        f"clause {ci + 1}: literal {lit} outside 1..{self.num_vars}")

    @classmethod
    def from_clauses(cls, num_vars: int, clauses: Iterable[Iterable[int]],
                     source_name: str = "") -> "CnfFormula":
        """Build a formula, deduplicating literals and flagging tautologies."""
        stored = []
        tautologies = set()
        for ci, clause in enumerate(clauses):
            lits = tuple(dict.fromkeys(int(x) for x in clause))
            if any(-x in lits for x in lits):
                tautologies.add(ci)
            stored.append(lits)
        return cls(num_vars, tuple(stored), source_name, frozenset(tautologies))

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def has_empty_clause(self) -> bool:
        return any(len(c) == 0 for c in self.clauses)

    def literals(self, index: int) -> list[Literal]:
        return [Literal.from_int(x) for x in self.clauses[index]]

    def to_dimacs(self) -> str:
        lines = []
        if self.source_name:
            lines.append(f"c {self.source_name}")
        lines.append(f"p cnf {self.num_vars} {self.num_clauses}")
        for clause in self.clauses:
            lines.append(" ".join(map(str, clause + (0,))))
        return "\n".join(lines) + "\n"

    def with_units(self, pairs: Iterable[tuple[int, bool]]) -> "CnfFormula":
        """Copy of the formula with (variable, value) pairs added as unit clauses."""
        extra = [(v if val else -v,) for v, val in pairs]
        return CnfFormula.from_clauses(
            self.num_vars, list(self.clauses) + extra, self.source_name)


_HEADER = re.compile(r"^p\s+cnf\s+(\S+)\s+(\S+)\s*$")


def parse_dimacs(data: str | bytes, source_name: str = "") -> CnfFormula:
    """Parse DIMACS CNF text.

    A header/body clause-count mismatch only logs a warning. A trailing
    clause without its terminating 0 is accepted.
    """
    if isinstance(data, bytes):
        data = data.decode("ascii", errors="replace")

    num_vars = declared = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, raw in enumerate(data.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] == "c":
            continue
        if line[0] == "%":
            # SATLIB trailer
            break
        if line[0] == "p":
            if num_vars is not None:
                raise DimacsError(f"line {lineno}: duplicate header")
            m = _HEADER.match(line)
            if not m:
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                num_vars, declared = int(m.group(1)), int(m.group(2))
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from None
            if num_vars < 0 or declared < 0:
                raise DimacsError(f"line {lineno}: negative count in header")
            continue
        if num_vars is None:
            raise DimacsError(f"line {lineno}: clause before 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"line {lineno}: non-integer token {tok!r}") from None
            if lit == 0:
                clauses.append(current)
                current = []
            elif abs(lit) > num_vars:
                raise DimacsError(
                    f"line {lineno}: literal {lit} exceeds declared {num_vars} variables")
            else:
                current.append(lit)
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        clauses.append(current)
    if len(clauses) != declared:
        log.warning("%s: header declares %d clauses, found %d",
                    source_name or "<input>", declared, len(clauses))
    formula = CnfFormula.from_clauses(num_vars, clauses, source_name)
    if formula.tautologies:
        log.info("%d tautological clauses kept", len(formula.tautologies))
    return formula


def read_dimacs(path) -> CnfFormula:
    with open(path, "rb") as f:
        return parse_dimacs(f.read(), source_name=str(path))


def _check_model(formula: CnfFormula, model) -> np.ndarray:
    values = np.asarray(model.values if isinstance(model, Model) else model, dtype=bool)
    if values.shape != (formula.num_vars,):
        raise ValueError(
            f"model has {values.size} values, formula has {formula.num_vars} variables")
    return values


@dataclass(frozen=True, eq=False)
class Model:
    """Total assignment; ``values[v]`` is the value of DIMACS variable v+1."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=bool)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        return isinstance(other, Model) and np.array_equal(self.values, other.values)

    def __getitem__(self, variable: int) -> bool:
        """Value of 1-indexed ``variable``."""
        return bool(self.values[variable - 1])

    def literals(self) -> list[int]:
        return [v + 1 if x else -(v + 1) for v, x in enumerate(self.values)]


def clause_satisfied(clause: Sequence[int], values: np.ndarray) -> bool:
    for lit in clause:
        if values[abs(lit) - 1] == (lit > 0):
            return True
    return False


def count_satisfied_clauses(formula: CnfFormula, model) -> int:
    values = _check_model(formula, model)
    return sum(clause_satisfied(c, values) for c in formula.clauses)


def verify_model(formula: CnfFormula, model) -> bool:
    values = _check_model(formula, model)
    return all(clause_satisfied(c, values) for c in formula.clauses)


# -- SAT competition output -------------------------------------------------

def format_solution(status: str, model: Model | None = None, width: int = 20) -> str:
    """Render ``s`` / ``v`` lines; ``status`` is SATISFIABLE, UNSATISFIABLE or UNKNOWN."""
    lines = [f"s {status}"]
    if model is not None:
        lits = model.literals() + [0]
        for i in range(0, len(lits), width):
            lines.append("v " + " ".join(map(str, lits[i:i + width])))
    return "\n".join(lines) + "\n"


def parse_solution(text: str, num_vars: int) -> tuple[str, Model | None]:
    """Parse solver output in ``s``/``v`` format back into (status, model).

    Variables missing from the ``v`` lines default to false.
    """
    status = None
    lits: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("s "):
            status = line[2:].strip()
        elif line.startswith("v ") or line == "v":
            lits.extend(int(t) for t in line[1:].split())
    if status is None:
        raise ValueError("no status line in solver output")
    if status != "SATISFIABLE":
        return status, None
    values = np.zeros(num_vars, dtype=bool)
    for lit in lits:
        if lit > 0:
            if lit > num_vars:
                raise ValueError(f"model literal {lit} exceeds {num_vars} variables")
            values[lit - 1] = True
    return status, Model(values)
