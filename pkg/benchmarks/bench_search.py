"""Compare the jitted scoring kernel against the pure-numpy path.

Run:  python3 benchmarks/bench_search.py [--sizes 1000,10000,100000] [--dim 256]

Both backends are timed on identical data and checked for agreement first;
the jit path is warmed before timing so compilation cost is reported
separately, not folded into the per-call numbers.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from aprbot import kernels


def time_backend(fn, matrix, query, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(matrix, query)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="1000,10000,100000")
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if not kernels.HAS_NUMBA:
        print("numba is not importable; only the numpy path is available")
        return

    rng = np.random.default_rng(args.seed)
    warm = np.ascontiguousarray(rng.normal(size=(64, args.dim)))
    start = time.perf_counter()
    kernels.dot_all_numba(warm, np.ascontiguousarray(rng.normal(size=args.dim)))
    print(f"jit warmup (compile or cache load): {time.perf_counter() - start:.3f}s\n")

    header = f"{'rows':>8} {'dim':>5} {'numpy':>12} {'numba':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for rows in sizes:
        matrix = np.ascontiguousarray(rng.normal(size=(rows, args.dim)))
        query = np.ascontiguousarray(rng.normal(size=args.dim))
        got_np = kernels.dot_all_numpy(matrix, query)
        got_nb = kernels.dot_all_numba(matrix, query)
        # summation order differs (BLAS vs sequential loop), so allow ulp-scale slack
        if not np.allclose(got_np, got_nb, rtol=1e-10, atol=1e-12):
            worst = float(np.max(np.abs(got_np - got_nb)))
            raise SystemExit(f"backend mismatch at rows={rows}: max |delta| = {worst:g}")
        t_np = time_backend(kernels.dot_all_numpy, matrix, query, args.repeats)
        t_nb = time_backend(kernels.dot_all_numba, matrix, query, args.repeats)
        print(f"{rows:>8} {args.dim:>5} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us "
              f"{t_np / t_nb:>7.2f}x")


if __name__ == "__main__":
    main()
