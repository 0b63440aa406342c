"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--vars 2000] [--candidates 256] [--repeat 20]

Both backends are imported side by side, so one process compares them
regardless of GRADSAT_NUMBA. A full gradient step (forward product,
smooth-min gradient, transpose product) is timed as well.
"""

import argparse
import time

import numpy as np

from gradsat.encoding import encode_problem
from gradsat.generate import random_ksat
from gradsat.kernels import backends


def best_of(fn, repeat):
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--vars", type=int, default=2000)
    ap.add_argument("--ratio", type=float, default=4.2)
    ap.add_argument("--candidates", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    f = random_ksat(args.vars, int(args.ratio * args.vars), seed=0)
    P = encode_problem(f)
    rng = np.random.default_rng(0)
    pos = rng.random((args.vars, args.candidates)) < 0.5
    A = np.empty((2 * args.vars, args.candidates), dtype=np.uint8)
    A[0::2], A[1::2] = pos, ~pos

    impls = backends()
    if "numba" not in impls:
        print("numba is not installed; only the numpy backend is available")
    print(f"V={args.vars} C={P.num_clauses} N={args.candidates} best of {args.repeat}, ms")
    rows = {}
    for name, k in impls.items():
        R = k.spmm_forward(P.row_offsets, P.column_indices, A)
        Rf = R.astype(np.float64)
        _, dS = k.smooth_min_grad_int(R, 1.0)
        G = np.ascontiguousarray(-dS)
        n_cols = 2 * args.vars

        def step():
            r = k.spmm_forward(P.row_offsets, P.column_indices, A)
            _, d = k.smooth_min_grad_int(r, 1.0)
            k.spmm_transpose(P.row_offsets, P.column_indices, np.ascontiguousarray(-d), n_cols)

        rows[name] = {
            "spmm_forward": best_of(lambda: k.spmm_forward(P.row_offsets, P.column_indices, A), args.repeat),
            "spmm_transpose": best_of(lambda: k.spmm_transpose(P.row_offsets, P.column_indices, G, n_cols), args.repeat),
            "smooth_min_grad (float)": best_of(lambda: k.smooth_min_grad(Rf, 1.0), args.repeat),
            "smooth_min_grad (int)": best_of(lambda: k.smooth_min_grad_int(R, 1.0), args.repeat),
            "gradient step": best_of(step, args.repeat),
        }

    names = list(rows)
    print(f"{'kernel':26s}" + "".join(f"{n:>10s}" for n in names) +
          ("   speedup" if len(names) == 2 else ""))
    for kernel in rows[names[0]]:
        vals = [rows[n][kernel] * 1e3 for n in names]
        line = f"{kernel:26s}" + "".join(f"{v:10.3f}" for v in vals)
        if len(vals) == 2:
            line += f"{vals[0] / vals[1]:9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
