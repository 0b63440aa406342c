"""Command line entry point.

    gradsat solve FILE [options]     competition-style s/v output, exit 10/20/0
    gradsat bench DIR [options]      hybrid vs unseeded baseline, PAR2 + curves
    gradsat generate OUT [options]   random or planted 3-SAT instances
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .cdcl import Status
from .cnf import DimacsError, format_solution, read_dimacs
from .confidence import dump_partials, extract
from .encoding import encode_problem
from .generate import planted_ksat, random_ksat
from .grad import OptimizerConfig, write_trace
from .orchestrator import HybridConfig, solve_hybrid

EXIT_SAT, EXIT_UNSAT, EXIT_UNKNOWN = 10, 20, 0

_STATUS_LINE = {Status.SAT: "SATISFIABLE", Status.UNSAT: "UNSATISFIABLE"}


def _add_solver_options(p):
    p.add_argument("--candidates", type=int, default=256, metavar="N",
                   help="candidate assignments optimized in parallel (default 256)")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1, metavar="W",
                   help="CDCL workers, one of them unseeded (default: CPU count)")
    p.add_argument("--tau", type=float, default=1.0, help="smooth-min temperature")
    p.add_argument("--max-iters", type=int, default=3600, help="gradient iteration cap")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--normalize", action="store_true",
                   help="enable per-variable row-mean normalization")
    p.add_argument("--executor", choices=("process", "thread"), default="process")


def _config(args, timeout) -> HybridConfig:
    opt = OptimizerConfig(tau=args.tau, max_iterations=args.max_iters,
                          rng_seed=args.seed, normalize=args.normalize)
    return HybridConfig(num_candidates=args.candidates, workers=args.workers,
                        optimizer=opt, timeout=timeout, executor=args.executor,
                        unseeded_only=getattr(args, "unseeded_only", False),
                        gradient_only=getattr(args, "gradient_only", False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradsat", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one DIMACS file")
    p.add_argument("input")
    _add_solver_options(p)
    p.add_argument("--timeout", type=float, default=None, metavar="SECONDS")
    p.add_argument("--trace", metavar="CSV", help="write per-iteration gradient trace")
    p.add_argument("--json-stats", metavar="PATH", help="write run statistics as JSON")
    p.add_argument("--dump-partials", metavar="PATH",
                   help="write extracted partial assignments as JSON")
    p.add_argument("--dump-matrix", metavar="PATH",
                   help="write the problem matrix in Matrix Market format")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--unseeded-only", action="store_true",
                      help="baseline: one CDCL worker from scratch, no gradient phase")
    mode.add_argument("--gradient-only", action="store_true",
                      help="gradient phase only; cannot prove UNSAT")

    b = sub.add_parser("bench", help="run hybrid and baseline over a directory of .cnf files")
    b.add_argument("directory")
    _add_solver_options(b)
    b.add_argument("--timeout", type=float, default=60.0, metavar="SECONDS")
    b.add_argument("--out", default="bench_out", help="output directory for report.json and curves.csv")

    g = sub.add_parser("generate", help="write random 3-SAT instances")
    g.add_argument("out_dir")
    g.add_argument("--count", type=int, default=10)
    g.add_argument("--vars", type=int, default=100)
    g.add_argument("--ratio", type=float, default=4.2)
    g.add_argument("-k", type=int, default=3)
    g.add_argument("--planted", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_solve(args) -> int:
    try:
        formula = read_dimacs(args.input)
    except (OSError, DimacsError) as exc:
        print(f"gradsat: {exc}", file=sys.stderr)
        return 1
    if args.dump_matrix:
        encode_problem(formula).write_matrix_market(args.dump_matrix)
    result = solve_hybrid(formula, _config(args, args.timeout))

    status = result.status
    sys.stdout.write(format_solution(_STATUS_LINE.get(status, "UNKNOWN"), result.outcome.model))
    sys.stdout.flush()
    snap = result.gradient
    if args.trace and snap is not None:
        write_trace(snap, args.trace)
    if args.dump_partials and snap is not None:
        dump_partials(extract(snap, num_requested=args.candidates), args.dump_partials)
    if args.json_stats:
        with open(args.json_stats, "w") as f:
            json.dump(result.to_json_obj(), f, indent=1)
    return {Status.SAT: EXIT_SAT, Status.UNSAT: EXIT_UNSAT}.get(status, EXIT_UNKNOWN)


def _cmd_bench(args) -> int:
    from .bench import run_suite

    try:
        suite = run_suite(args.directory, _config(args, args.timeout), args.timeout)
    except FileNotFoundError as exc:
        print(f"gradsat: {exc}", file=sys.stderr)
        return 1
    suite.write(args.out)
    for rep in (suite.hybrid, suite.baseline):
        solved = sum(r.solved for r in rep.records)
        print(f"{rep.solver:9s} solved {solved}/{len(rep.records)}  PAR2 {rep.par2:.3f}")
    return 0


def _cmd_generate(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    m = int(round(args.ratio * args.vars))
    for i in range(args.count):
        seed = args.seed + i
        name = f"{'planted' if args.planted else 'random'}-n{args.vars}-m{m}-s{seed}.cnf"
        if args.planted:
            formula, _ = planted_ksat(args.vars, m, args.k, seed, name)
        else:
            formula = random_ksat(args.vars, m, args.k, seed, name)
        (out / name).write_text(formula.to_dimacs())
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "workers", 1) < 1 or getattr(args, "candidates", 1) < 1:
        print("gradsat: --workers and --candidates must be >= 1", file=sys.stderr)
        return 2
    return {"solve": _cmd_solve, "bench": _cmd_bench, "generate": _cmd_generate}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
