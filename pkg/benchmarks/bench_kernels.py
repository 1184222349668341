"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one row per (kernel, size) with the best-of-``repeat`` time for each
backend and the speedup.
"""

import argparse
import timeit

import numpy as np

from nnlad import _backend
from nnlad.expander import generate_dlrbg
from nnlad.solvers import SolverParams, nnlad_solve

SIZES = [(256, 64, 8), (1024, 256, 10), (8192, 2048, 10)]


def cases(A, rng):
    N, M = A.n_cols, A.n_rows
    x, w = rng.normal(size=N), rng.normal(size=M)
    y = A.matvec(np.abs(x) * (rng.random(N) < 0.02))
    p = SolverParams(max_iters=1000, certify=False)
    return {
        "matvec": lambda k: k.matvec(A.col_rows, M, x),
        "rmatvec": lambda k: k.rmatvec(A.col_rows, w),
        "median": lambda k: k.median_neighbors(A.col_rows, w),
        "nnlad_1000it": lambda k: nnlad_solve(A, y, p, op_norm=2.0 * np.sqrt(N / M)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = _backend.available()
    if "compiled" not in names:
        print("compiled extension not built; only the fallback is timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'N':>6}{'M':>6}{'D':>4}" + "".join(f"{n:>14}" for n in names) + "   speedup")
    prev = _backend.kernels
    try:
        for N, M, D in SIZES:
            A = generate_dlrbg(N, M, D, seed=rng)
            for label, fn in cases(A, rng).items():
                times = {}
                for name in names:
                    k = _backend.use(name)
                    number = 1 if label.startswith("nnlad") else 20
                    times[name] = min(timeit.repeat(lambda: fn(k), number=number,
                                                    repeat=args.repeat)) / number
                row = f"{label:<14}{N:>6}{M:>6}{D:>4}" + "".join(f"{times[n] * 1e3:>12.3f}ms" for n in names)
                if len(names) == 2:
                    row += f"   {times['python'] / times['compiled']:6.1f}x"
                print(row)
    finally:
        _backend.kernels = prev


if __name__ == "__main__":
    main()
