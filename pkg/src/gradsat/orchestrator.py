"""Gradient phase followed by a portfolio of assumption-seeded CDCL workers.

Worker 0 always searches from scratch, so the pipeline is never weaker than
its CDCL engine. UNSAT is only reported from that worker. A seeded worker
whose seed is refuted retries with the more confident half of its seed,
down to an empty seed.
"""

from __future__ import annotations

import logging
import multiprocessing as mp
import os
import queue
import threading
import time
from dataclasses import dataclass, field

from .cdcl import Budget, SolveOutcome, Solver, Status
from .cnf import CnfFormula, Model, verify_model
from .confidence import PartialAssignment, extract
from .encoding import encode_problem
from .grad import GradSnapshot, OptimizerConfig, run_gradient_phase

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
GRADIENT = "gradient"
TRIVIAL = "trivial"


@dataclass(frozen=True)
class HybridConfig:
    num_candidates: int = 256
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    optimizer: OptimizerConfig = OptimizerConfig()
    timeout: float | None = None
    gradient_time_limit: float | None = None
    worker_max_conflicts: int | None = None
    retry_refuted_seeds: bool = True
    seed_phases: bool = True
    k: int | None = None
    unseeded_only: bool = False
    gradient_only: bool = False
    executor: str = "process"

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.num_candidates < 1:
            raise ValueError("num_candidates must be >= 1")
        if self.timeout is not None and self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.executor not in ("process", "thread"):
            raise ValueError("executor must be 'process' or 'thread'")
        if self.unseeded_only and self.gradient_only:
            raise ValueError("unseeded_only and gradient_only are exclusive")


@dataclass(frozen=True)
class WorkerPlan:
    worker_id: int
    seed: PartialAssignment | None = None
    heuristic_seed: int = 0


@dataclass
class WorkerReport:
    worker_id: int
    outcome: SolveOutcome
    seed_size: int
    attempts: list[tuple[int, str]]

    def summary(self) -> dict:
        return {"worker": self.worker_id, "status": self.outcome.status.value,
                "seed_size": self.seed_size,
                "attempts": [{"assumptions": n, "status": s} for n, s in self.attempts],
                **{k: v for k, v in self.outcome.stats.items()}}


@dataclass
class HybridResult:
    outcome: SolveOutcome
    winning_worker: int | str | None
    gradient_seconds: float = 0.0
    refinement_seconds: float = 0.0
    total_seconds: float = 0.0
    worker_stats: list[dict] = field(default_factory=list)
    gradient: GradSnapshot | None = None

    @property
    def status(self) -> Status:
        return self.outcome.status

    def to_json_obj(self) -> dict:
        grad = None
        if self.gradient is not None:
            g = self.gradient
            grad = {"iterations": g.iterations, "stop_reason": g.stop_reason,
                    "best_fraction": g.best_fraction, "best_column": g.best_column,
                    "final_loss": g.loss_history[-1] if g.loss_history else None}
        return {
            "schema": SCHEMA_VERSION,
            "status": self.outcome.status.value,
            "winner": self.winning_worker,
            "timings": {"gradient": self.gradient_seconds,
                        "refinement": self.refinement_seconds,
                        "total": self.total_seconds},
            "gradient": grad,
            "workers": self.worker_stats,
        }


def dispatch_plan(partials: list[PartialAssignment], workers: int) -> list[WorkerPlan]:
    """Assign seeds to workers 1..W-1 by descending satisfied count.

    Worker 0 and any surplus workers run unseeded; surplus workers get
    distinct heuristic seeds.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    ranked = sorted(partials, key=lambda p: -p.satisfied_count)
    plans = [WorkerPlan(0)]
    for w in range(1, workers):
        if w - 1 < len(ranked):
            plans.append(WorkerPlan(w, ranked[w - 1]))
        else:
            plans.append(WorkerPlan(w, None, heuristic_seed=w))
    return plans


def run_worker(formula: CnfFormula, plan: WorkerPlan, budget: Budget,
               seed_phases: bool = True, retry: bool = True, cancel=None) -> WorkerReport:
    """One CDCL worker, including the halving ladder for refuted seeds."""
    t0 = time.monotonic()
    seed = plan.seed
    phases = seed.column_values if (seed is not None and seed_phases) else None
    solver = Solver(formula, phases=phases, seed=plan.heuristic_seed)
    pairs = list(seed.pairs) if seed is not None else []
    attempts = []
    while True:
        remaining = None
        if budget.max_time is not None:
            remaining = budget.max_time - (time.monotonic() - t0)
            if remaining <= 0:
                outcome = SolveOutcome(Status.UNKNOWN, None, dict(solver.stats))
                break
        outcome = solver.solve(pairs, Budget(budget.max_conflicts, remaining), cancel)
        attempts.append((len(pairs), outcome.status.value))
        if outcome.status is Status.UNSAT_UNDER_ASSUMPTIONS and retry:
            pairs = pairs[:len(pairs) // 2]
            continue
        break
    return WorkerReport(plan.worker_id, outcome, len(seed) if seed is not None else 0, attempts)


def _worker_entry(formula, plan, budget, seed_phases, retry, cancel, results):
    try:
        report = run_worker(formula, plan, budget, seed_phases, retry, cancel)
    except Exception as exc:  # report instead of hanging the coordinator
        log.exception("worker %d failed", plan.worker_id)
        report = WorkerReport(plan.worker_id, SolveOutcome(Status.UNKNOWN, None,
                                                           {"error": repr(exc)}), 0, [])
    results.put(report)


def _accept(report: WorkerReport) -> bool:
    status = report.outcome.status
    return status is Status.SAT or (status is Status.UNSAT and report.worker_id == 0)


def _run_portfolio(formula, plans, config, budget):
    """Run the workers; return (winning report or None, all reports received)."""
    if len(plans) == 1:
        report = run_worker(formula, plans[0], budget, config.seed_phases,
                            config.retry_refuted_seeds)
        return (report if _accept(report) else None), [report]

    if config.executor == "process":
        ctx = mp.get_context("fork" if "fork" in mp.get_all_start_methods() else "spawn")
        cancel, results = ctx.Event(), ctx.Queue()
        spawn = ctx.Process
    else:
        cancel, results = threading.Event(), queue.Queue()
        spawn = threading.Thread
    runners = [spawn(target=_worker_entry, daemon=True,
                     args=(formula, p, budget, config.seed_phases,
                           config.retry_refuted_seeds, cancel, results))
               for p in plans]
    for r in runners:
        r.start()

    deadline = None if budget.max_time is None else time.monotonic() + budget.max_time + 1.0
    winner = None
    reports = []
    while len(reports) < len(runners):
        timeout = None if deadline is None else max(deadline - time.monotonic(), 0.0)
        try:
            report = results.get(timeout=timeout)
        except queue.Empty:
            break
        reports.append(report)
        if _accept(report):
            winner = report
            break

    cancel.set()
    # drain so that cancelled processes can flush their queue and exit
    grace = time.monotonic() + 2.0
    while len(reports) < len(runners) and time.monotonic() < grace:
        try:
            reports.append(results.get(timeout=max(grace - time.monotonic(), 0.01)))
        except queue.Empty:
            break
    for r in runners:
        r.join(timeout=0.5)
        if hasattr(r, "terminate") and r.is_alive():
            r.terminate()
            r.join(timeout=0.5)
    return winner, reports


def solve_hybrid(formula: CnfFormula, config: HybridConfig = HybridConfig()) -> HybridResult:
    t0 = time.monotonic()

    def remaining():
        if config.timeout is None:
            return None
        return config.timeout - (time.monotonic() - t0)

    if formula.has_empty_clause:
        return HybridResult(SolveOutcome(Status.UNSAT), TRIVIAL,
                            total_seconds=time.monotonic() - t0)
    if formula.num_clauses == 0:
        model = Model([False] * formula.num_vars)
        return HybridResult(SolveOutcome(Status.SAT, model), TRIVIAL,
                            total_seconds=time.monotonic() - t0)

    snapshot = None
    partials: list[PartialAssignment] = []
    gradient_seconds = 0.0
    if not config.unseeded_only:
        limit = remaining()
        if config.gradient_time_limit is not None:
            limit = config.gradient_time_limit if limit is None else min(limit, config.gradient_time_limit)
        snapshot = run_gradient_phase(encode_problem(formula), config.optimizer,
                                      config.num_candidates, time_limit=limit)
        gradient_seconds = snapshot.seconds
        if snapshot.model is not None:
            if not verify_model(formula, snapshot.model):
                raise AssertionError("internal error: gradient model fails verification")
            return HybridResult(SolveOutcome(Status.SAT, snapshot.model,
                                             {"iterations": snapshot.iterations}),
                                GRADIENT, gradient_seconds, 0.0,
                                time.monotonic() - t0, [], snapshot)
        if config.gradient_only:
            return HybridResult(SolveOutcome(Status.UNKNOWN, None,
                                             {"iterations": snapshot.iterations}),
                                None, gradient_seconds, 0.0, time.monotonic() - t0, [], snapshot)
        if config.workers > 1:
            partials = extract(snapshot, num_requested=config.workers - 1, k=config.k)

    workers = 1 if config.unseeded_only else config.workers
    plans = dispatch_plan(partials, workers)
    left = remaining()
    if left is not None and left <= 0:
        return HybridResult(SolveOutcome(Status.UNKNOWN), None, gradient_seconds, 0.0,
                            time.monotonic() - t0, [], snapshot)
    budget = Budget(config.worker_max_conflicts, left)

    t1 = time.monotonic()
    winner, reports = _run_portfolio(formula, plans, config, budget)
    refinement = time.monotonic() - t1
    stats = [r.summary() for r in sorted(reports, key=lambda r: r.worker_id)]
    if winner is None:
        outcome = SolveOutcome(Status.UNKNOWN, None, {})
        return HybridResult(outcome, None, gradient_seconds, refinement,
                            time.monotonic() - t0, stats, snapshot)
    outcome = winner.outcome
    if outcome.status is Status.SAT and not verify_model(formula, outcome.model):
        raise AssertionError("internal error: worker model fails verification")
    return HybridResult(outcome, winner.worker_id, gradient_seconds, refinement,
                        time.monotonic() - t0, stats, snapshot)
