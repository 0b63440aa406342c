"""Success rate of the gradient phase on satisfiable random 3-SAT.

    python3 benchmarks/calibrate_gradient.py [--vars 50] [--ratio 4.0] [--seeds 50]

Instances are uniform random 3-SAT filtered to the satisfiable ones with
the CDCL engine. A run succeeds when the best column satisfies more than
99% of the clauses within the iteration cap.
"""

import argparse
import statistics

from gradsat.cdcl import Status, solve
from gradsat.encoding import encode_problem
from gradsat.generate import random_ksat
from gradsat.grad import OptimizerConfig, run_gradient_phase


def satisfiable_instances(n, m, count):
    seed = 0
    while count:
        f = random_ksat(n, m, seed=seed)
        seed += 1
        if solve(f).status is Status.SAT:
            count -= 1
            yield seed - 1, f


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--vars", type=int, default=50)
    ap.add_argument("--ratio", type=float, default=4.0)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--candidates", type=int, nargs="+", default=[16, 64, 256])
    ap.add_argument("--tau", type=float, nargs="+", default=[0.5, 1.0, 5.0])
    args = ap.parse_args()

    m = round(args.ratio * args.vars)
    instances = list(satisfiable_instances(args.vars, m, args.seeds))
    print(f"n={args.vars} m={m}, {len(instances)} satisfiable instances")
    print(f"{'N':>5s} {'tau':>5s} {'success':>8s} {'sat':>5s} {'median iters':>13s}")
    for N in args.candidates:
        for tau in args.tau:
            cfg = OptimizerConfig(tau=tau)
            ok = sat = 0
            iters = []
            for seed, f in instances:
                snap = run_gradient_phase(encode_problem(f), cfg.replace(rng_seed=seed), N)
                ok += snap.best_fraction > cfg.convergence_fraction
                sat += snap.is_sat
                iters.append(snap.iterations)
            print(f"{N:5d} {tau:5.1f} {ok / len(instances):8.0%} {sat:5d} "
                  f"{statistics.median(iters):13.0f}")


if __name__ == "__main__":
    main()
