"""Conflict-driven clause learning solver with an assumption interface.

Internal literal code: ``2 * v + neg`` for 0-indexed variable v, so a
literal's negation is ``lit ^ 1``. This matches the column layout of the
problem matrix. Public functions take and return DIMACS-signed integers or
(variable, value) pairs with 1-indexed variables.
"""

from __future__ import annotations

import enum
import heapq
import logging
import random
import time
from dataclasses import dataclass, field
from typing import Iterable

from .cnf import CnfFormula, Model, verify_model

log = logging.getLogger(__name__)

VAR_DECAY = 0.95
CLAUSE_DECAY = 0.999
LUBY_UNIT = 100
LEARNT_SLACK = 4000


class Status(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNSAT_UNDER_ASSUMPTIONS = "UNSAT_UNDER_ASSUMPTIONS"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class Budget:
    max_conflicts: int | None = None
    max_time: float | None = None

    def __post_init__(self):
        if self.max_conflicts is not None and self.max_conflicts <= 0:
            raise ValueError("max_conflicts must be positive")
        if self.max_time is not None and self.max_time <= 0:
            raise ValueError("max_time must be positive")


@dataclass
class SolveOutcome:
    status: Status
    model: Model | None = None
    stats: dict = field(default_factory=dict)


def to_internal(lit: int) -> int:
    return 2 * (abs(lit) - 1) + (lit < 0)


def to_dimacs(lit: int) -> int:
    v = (lit >> 1) + 1
    return -v if lit & 1 else v


def luby(i: int) -> int:
    """i-th element (0-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i %= size
    return 1 << seq


def assumption_literals(assumptions) -> list[int]:
    """Normalize assumptions to DIMACS-signed ints.

    Accepts an object with a ``pairs`` attribute, (variable, value) pairs,
    or signed integers.
    """
    if assumptions is None:
        return []
    items = getattr(assumptions, "pairs", assumptions)
    out = []
    for item in items:
        if isinstance(item, tuple):
            v, value = item
            out.append(int(v) if value else -int(v))
        else:
            out.append(int(item))
    return out


class Solver:
    """Mutable search state for one formula.

    The step methods (``propagate``, ``analyze``, ``decide``,
    ``backtrack``) are public so they can be driven one at a time; ``solve``
    runs the full search loop.
    """

    def __init__(self, formula: CnfFormula, phases=None, seed: int = 0):
        self.formula = formula
        n = self.num_vars = formula.num_vars
        self.val = [0] * (2 * n)          # per literal: 1 true, -1 false, 0 unassigned
        self.level = [-1] * n
        self.reason = [-1] * n
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.watches: list[list[int]] = [[] for _ in range(2 * n)]
        self.clauses: list[list[int] | None] = []
        self.learnt: list[bool] = []
        self.lbd: list[int] = []
        self.cla_act: list[float] = []
        self.num_original = 0
        self.num_learnt = 0
        self.activity = [0.0] * n
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.phase = [False] * n if phases is None else [bool(x) for x in phases]
        if len(self.phase) != n:
            raise ValueError("phases must have one entry per variable")
        self.seen = [False] * n
        self.ok = True
        self.stats = dict(conflicts=0, decisions=0, propagations=0, restarts=0,
                          learned=0, deleted=0)
        if seed:
            rng = random.Random(seed)
            self.activity = [rng.random() * 1e-5 for _ in range(n)]
        self.heap = [(-a, v) for v, a in enumerate(self.activity)]
        heapq.heapify(self.heap)

        for clause in formula.clauses:
            lits = [to_internal(x) for x in clause]
            if any(l ^ 1 in lits for l in lits):
                continue
            if not lits:
                self.ok = False
            elif len(lits) == 1:
                if self.val[lits[0]] == -1:
                    self.ok = False
                elif self.val[lits[0]] == 0:
                    self.enqueue(lits[0], -1)
            else:
                self._attach(lits, learnt=False)
        self.num_original = len(self.clauses)

    # -- basic state ----------------------------------------------------------

    @property
    def decision_level(self) -> int:
        return len(self.trail_lim)

    def value(self, lit: int) -> int:
        return self.val[lit]

    def enqueue(self, lit: int, reason: int) -> None:
        v = lit >> 1
        self.val[lit] = 1
        self.val[lit ^ 1] = -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def new_decision(self, lit: int) -> None:
        self.trail_lim.append(len(self.trail))
        if lit >= 0:
            self.enqueue(lit, -1)

    def _attach(self, lits: list[int], learnt: bool, lbd: int = 0) -> int:
        ci = len(self.clauses)
        self.clauses.append(lits)
        self.learnt.append(learnt)
        self.lbd.append(lbd)
        self.cla_act.append(0.0)
        self.watches[lits[0]].append(ci)
        self.watches[lits[1]].append(ci)
        return ci

    def backtrack(self, level: int) -> None:
        if self.decision_level <= level:
            return
        val, phase, reason, activity, heap = self.val, self.phase, self.reason, self.activity, self.heap
        start = self.trail_lim[level]
        for i in range(len(self.trail) - 1, start - 1, -1):
            lit = self.trail[i]
            v = lit >> 1
            val[lit] = 0
            val[lit ^ 1] = 0
            reason[v] = -1
            phase[v] = not (lit & 1)
            heapq.heappush(heap, (-activity[v], v))
        del self.trail[start:]
        del self.trail_lim[level:]
        self.qhead = len(self.trail)

    # -- propagation ----------------------------------------------------------

    def propagate(self) -> int | None:
        """Unit propagation to fixpoint. Returns a conflicting clause index or None."""
        val, clauses, watches, trail = self.val, self.clauses, self.watches, self.trail
        level, reason = self.level, self.reason
        qhead = self.qhead
        dl = len(self.trail_lim)
        confl = None
        while qhead < len(trail):
            false_lit = trail[qhead] ^ 1
            qhead += 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if val[first] == 1:
                    ws[j] = ci
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if val[lk] != -1:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk].append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if val[first] == -1:
                        confl = ci
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                    else:
                        val[first] = 1
                        val[first ^ 1] = -1
                        v = first >> 1
                        level[v] = dl
                        reason[v] = ci
                        trail.append(first)
            del ws[j:]
            if confl is not None:
                qhead = len(trail)
                break
        self.stats["propagations"] += qhead - self.qhead
        self.qhead = qhead
        return confl

    # -- conflict analysis ----------------------------------------------------

    def _bump_var(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for u in range(self.num_vars):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-act[u], u) for u in range(self.num_vars) if self.val[2 * u] == 0]
            heapq.heapify(self.heap)
        elif self.val[2 * v] == 0:
            heapq.heappush(self.heap, (-act[v], v))

    def _bump_clause(self, ci: int) -> None:
        self.cla_act[ci] += self.cla_inc
        if self.cla_act[ci] > 1e20:
            self.cla_act = [a * 1e-20 for a in self.cla_act]
            self.cla_inc *= 1e-20

    def analyze(self, confl: int) -> tuple[list[int], int]:
        """First-UIP learning.

        Returns (learned clause, backjump level). The asserting literal is at
        position 0; when the clause has more than one literal, position 1
        holds a literal from the backjump level.
        """
        clauses, seen, level, reason, trail = self.clauses, self.seen, self.level, self.reason, self.trail
        dl = self.decision_level
        learnt = [-1]
        path = 0
        p = -1
        idx = len(trail) - 1
        ci = confl
        while True:
            if self.learnt[ci]:
                self._bump_clause(ci)
            c = clauses[ci]
            for q in (c if p == -1 else c[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    self._bump_var(v)
                    seen[v] = True
                    if level[v] >= dl:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            ci = reason[p >> 1]
            seen[p >> 1] = False
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1

        # local minimization: drop literals whose reason is subsumed by the clause
        keep = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r == -1:
                keep.append(q)
                continue
            for x in clauses[r][1:]:
                if not seen[x >> 1] and level[x >> 1] > 0:
                    keep.append(q)
                    break
        for q in learnt[1:]:
            seen[q >> 1] = False
        learnt = keep

        if len(learnt) == 1:
            return learnt, 0
        best = 1
        for i in range(2, len(learnt)):
            if level[learnt[i] >> 1] > level[learnt[best] >> 1]:
                best = i
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def add_learnt(self, learnt: list[int]) -> None:
        """Record a clause from ``analyze`` after backjumping and assert it."""
        self.stats["learned"] += 1
        if len(learnt) == 1:
            self.enqueue(learnt[0], -1)
            return
        lbd = len({self.level[x >> 1] for x in learnt})
        ci = self._attach(learnt, learnt=True, lbd=lbd)
        self.num_learnt += 1
        self._bump_clause(ci)
        self.enqueue(learnt[0], ci)

    def _decay(self) -> None:
        self.var_inc /= VAR_DECAY
        self.cla_inc /= CLAUSE_DECAY

    # -- decisions ------------------------------------------------------------

    def decide(self) -> int | None:
        """Highest-activity unassigned variable (lowest index on ties) with its saved phase."""
        heap, val, act = self.heap, self.val, self.activity
        while heap:
            neg_a, v = heap[0]
            if val[2 * v] == 0 and -neg_a == act[v]:
                return 2 * v + (0 if self.phase[v] else 1)
            heapq.heappop(heap)
        return None

    # -- clause database ------------------------------------------------------

    def _locked(self, ci: int) -> bool:
        c = self.clauses[ci]
        v = c[0] >> 1
        return self.reason[v] == ci and self.val[c[0]] == 1

    def reduce_db(self) -> None:
        """Delete the less active half of learned clauses with LBD > 2."""
        candidates = [ci for ci in range(self.num_original, len(self.clauses))
                      if self.clauses[ci] is not None and self.lbd[ci] > 2
                      and not self._locked(ci)]
        candidates.sort(key=lambda ci: self.cla_act[ci])
        for ci in candidates[:len(candidates) // 2]:
            self.clauses[ci] = None
            self.num_learnt -= 1
            self.stats["deleted"] += 1
        self.watches = [[] for _ in range(2 * self.num_vars)]
        for ci, c in enumerate(self.clauses):
            if c is not None:
                self.watches[c[0]].append(ci)
                self.watches[c[1]].append(ci)
        if len(self.heap) > 8 * self.num_vars + 64:
            self.heap = [(-self.activity[u], u) for u in range(self.num_vars)
                         if self.val[2 * u] == 0]
            heapq.heapify(self.heap)

    def watch_invariant_ok(self) -> bool:
        """A false watched literal is only allowed next to a true one."""
        for ci, c in enumerate(self.clauses):
            if c is None:
                continue
            if ci not in self.watches[c[0]] or ci not in self.watches[c[1]]:
                return False
            a, b = self.val[c[0]], self.val[c[1]]
            if (a == -1 and b != 1) or (b == -1 and a != 1):
                return False
        return True

    def model(self) -> Model:
        return Model([self.val[2 * v] == 1 for v in range(self.num_vars)])

    # -- search ---------------------------------------------------------------

    def solve(self, assumptions=(), budget: Budget | None = None, cancel=None) -> SolveOutcome:
        t0 = time.monotonic()
        budget = budget or Budget()
        assume = [to_internal(x) for x in assumption_literals(assumptions)]
        if len({a >> 1 for a in assume}) != len(assume):
            raise ValueError("duplicate variable in assumptions")
        for a in assume:
            if not 0 <= a >> 1 < self.num_vars:
                raise ValueError(f"assumption {to_dimacs(a)} outside 1..{self.num_vars}")
        status = self._search(assume, budget, cancel, t0)
        self.stats["wall_time"] = time.monotonic() - t0
        model = None
        if status is Status.SAT:
            model = self.model()
            if not verify_model(self.formula, model):
                raise AssertionError("internal error: model fails verification")
        self.backtrack(0)
        return SolveOutcome(status, model, dict(self.stats))

    def _search(self, assume, budget, cancel, t0) -> Status:
        if not self.ok:
            return Status.UNSAT
        self.backtrack(0)
        stats = self.stats
        max_conflicts = budget.max_conflicts
        deadline = None if budget.max_time is None else t0 + budget.max_time
        conflicts_at_start = stats["conflicts"]
        restart_idx = 0
        restart_limit = luby(0) * LUBY_UNIT
        since_restart = 0
        max_learnt = self.num_original + LEARNT_SLACK
        loops = 0
        while True:
            loops += 1
            if cancel is not None and cancel.is_set():
                return Status.UNKNOWN
            if deadline is not None and loops % 32 == 0 and time.monotonic() > deadline:
                return Status.UNKNOWN
            confl = self.propagate()
            if confl is not None:
                stats["conflicts"] += 1
                since_restart += 1
                if self.decision_level == 0:
                    self.ok = False
                    return Status.UNSAT
                learnt, bt = self.analyze(confl)
                self.backtrack(bt)
                self.add_learnt(learnt)
                self._decay()
                if max_conflicts is not None and stats["conflicts"] - conflicts_at_start >= max_conflicts:
                    return Status.UNKNOWN
                if deadline is not None and time.monotonic() > deadline:
                    return Status.UNKNOWN
                continue

            if since_restart >= restart_limit:
                stats["restarts"] += 1
                restart_idx += 1
                restart_limit = luby(restart_idx) * LUBY_UNIT
                since_restart = 0
                self.backtrack(0)
                continue
            if self.num_original + self.num_learnt > max_learnt:
                self.reduce_db()

            nxt = -1
            while self.decision_level < len(assume):
                p = assume[self.decision_level]
                if self.val[p] == 1:
                    self.new_decision(-1)
                elif self.val[p] == -1:
                    return Status.UNSAT_UNDER_ASSUMPTIONS
                else:
                    nxt = p
                    break
            if nxt == -1:
                nxt = self.decide()
                if nxt is None:
                    return Status.SAT
            stats["decisions"] += 1
            self.new_decision(nxt)


def solve(formula: CnfFormula, assumptions=(), budget: Budget | None = None, *,
          phases=None, seed: int = 0, cancel=None) -> SolveOutcome:
    """Solve ``formula`` from scratch, optionally under assumptions.

    ``phases`` seeds the saved polarity of every variable; ``seed`` perturbs
    initial variable activities (0 keeps the deterministic default order).
    """
    return Solver(formula, phases=phases, seed=seed).solve(assumptions, budget, cancel)


def assumptions_as_units(formula: CnfFormula, assumptions: Iterable) -> CnfFormula:
    """Formula copy with the assumptions as unit clauses, for external solvers."""
    lits = assumption_literals(assumptions)
    return formula.with_units((abs(x), x > 0) for x in lits)
