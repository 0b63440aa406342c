"""Suite runner with PAR2 scoring and cumulative solved-count curves."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .cnf import read_dimacs
from .orchestrator import SCHEMA_VERSION, HybridConfig, solve_hybrid

log = logging.getLogger(__name__)

SOLVED = ("SAT", "UNSAT")


@dataclass
class RunRecord:
    instance: str
    status: str
    wall_time: float
    timeout: float
    solver: str
    phases: dict = field(default_factory=dict)

    @property
    def solved(self) -> bool:
        return self.status in SOLVED and self.wall_time <= self.timeout


@dataclass
class BenchmarkReport:
    solver: str
    records: list[RunRecord]
    par2: float
    cumulative_curve: list[tuple[float, int]]

    def to_json_obj(self) -> dict:
        return {"solver": self.solver, "par2": self.par2,
                "records": [asdict(r) for r in self.records],
                "cumulative_curve": [list(p) for p in self.cumulative_curve]}


def compute_par2(records: list[RunRecord], timeout: float | None = None) -> float:
    """Mean runtime with unsolved instances charged twice the timeout."""
    if not records:
        raise ValueError("no records")
    if timeout is None:
        timeout = records[0].timeout
    if any(r.timeout != timeout for r in records):
        raise ValueError("records use different timeouts")
    total = 0.0
    for r in records:
        total += r.wall_time if r.solved else 2.0 * timeout
    return total / len(records)


def cumulative_curve(records: list[RunRecord], grid) -> list[tuple[float, int]]:
    """Number of solved records with runtime <= each limit in ``grid``."""
    grid = list(grid)
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be sorted ascending")
    times = sorted(r.wall_time for r in records if r.status in SOLVED)
    out = []
    i = 0
    for limit in grid:
        while i < len(times) and times[i] <= limit:
            i += 1
        out.append((limit, i))
    return out


def make_report(solver: str, records: list[RunRecord], timeout: float, grid) -> BenchmarkReport:
    return BenchmarkReport(solver, records, compute_par2(records, timeout),
                           cumulative_curve(records, grid))


def _run_one(path: Path, config: HybridConfig, label: str, timeout: float) -> RunRecord:
    t0 = time.monotonic()
    try:
        formula = read_dimacs(path)
        result = solve_hybrid(formula, config)
    except Exception as exc:
        log.warning("%s (%s): %s", path.name, label, exc)
        return RunRecord(path.name, "UNKNOWN", time.monotonic() - t0, timeout, label,
                         {"error": repr(exc)})
    status = result.status.value
    if status not in SOLVED:
        status = "UNKNOWN"
    return RunRecord(path.name, status, time.monotonic() - t0, timeout, label,
                     {"gradient": result.gradient_seconds,
                      "refinement": result.refinement_seconds,
                      "winner": result.winning_worker})


@dataclass
class SuiteResult:
    hybrid: BenchmarkReport
    baseline: BenchmarkReport
    grid: list[float]

    def to_json_obj(self) -> dict:
        return {"schema": SCHEMA_VERSION, "hybrid": self.hybrid.to_json_obj(),
                "baseline": self.baseline.to_json_obj()}

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "report.json", "w") as f:
            json.dump(self.to_json_obj(), f, indent=1)
        with open(out / "curves.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["limit", "solved_hybrid", "solved_baseline"])
            for (limit, h), (_, b) in zip(self.hybrid.cumulative_curve,
                                          self.baseline.cumulative_curve):
                w.writerow([limit, h, b])


def run_suite(directory, config: HybridConfig = HybridConfig(), timeout: float = 60.0,
              grid=None) -> SuiteResult:
    """Run the hybrid solver and the unseeded baseline on every ``.cnf`` file."""
    files = sorted(Path(directory).glob("*.cnf"))
    if not files:
        raise FileNotFoundError(f"no .cnf files in {directory}")
    hybrid_cfg = replace(config, timeout=timeout, unseeded_only=False, gradient_only=False)
    base_cfg = replace(hybrid_cfg, unseeded_only=True)
    hybrid, baseline = [], []
    for path in files:
        hybrid.append(_run_one(path, hybrid_cfg, "hybrid", timeout))
        baseline.append(_run_one(path, base_cfg, "baseline", timeout))
        log.info("%s: hybrid %s %.3fs, baseline %s %.3fs", path.name,
                 hybrid[-1].status, hybrid[-1].wall_time,
                 baseline[-1].status, baseline[-1].wall_time)
    if grid is None:
        grid = sorted({r.wall_time for r in hybrid + baseline if r.solved} | {timeout})
    return SuiteResult(make_report("hybrid", hybrid, timeout, grid),
                       make_report("baseline", baseline, timeout, grid), list(grid))
