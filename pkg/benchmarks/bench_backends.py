#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot paths on synthetic workloads: the batched log-denominator
recursion (driven once per likelihood evaluation) and the projected-gradient
QP solve (the core of the separation test). Run after installing the
package:

    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --n 50000 --qp-size 8000 --repeats 7
"""

import argparse
import time

import numpy as np

from felogit import _kernels


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_logdenom(n, T, p, repeats, rng):
    scores = 2.0 * rng.standard_normal((n, T))
    covariates = rng.standard_normal((n, T, p))
    totals = rng.integers(0, T + 1, size=n).astype(np.int64)
    rows = {}
    if _kernels.logdenom_numba is not None:
        _kernels.logdenom_numba(scores, covariates, totals)  # compile
        rows["numba"] = _time(
            lambda: _kernels.logdenom_numba(scores, covariates, totals), repeats
        )
    rows["numpy"] = _time(
        lambda: _kernels.logdenom_numpy(scores, covariates, totals), repeats
    )
    if len(rows) == 2:
        a = _kernels.logdenom_numba(scores, covariates, totals)
        b = _kernels.logdenom_numpy(scores, covariates, totals)
        drift = max(
            np.abs(a[0] - b[0]).max() / max(1.0, np.abs(b[0]).max()),
            np.abs(a[1] - b[1]).max() / max(1.0, np.abs(b[1]).max()),
        )
    else:
        drift = 0.0
    return rows, drift


def bench_qp(count, m, p, repeats, rng):
    # many small instances, the profile of a simulation experiment; each has
    # a near-antipodal pair so the solver does real iteration work
    problems = []
    for _ in range(count):
        w = rng.standard_normal((m, p))
        w[1] = -w[0] + 1e-3 * rng.standard_normal(p)
        w /= np.linalg.norm(w, axis=1, keepdims=True)
        problems.append(w)

    def sweep(solver):
        total = 0.0
        for w in problems:
            total += solver(w, 1e-8, 1e-6, 100_000)[1]
        return total

    rows = {}
    if _kernels.qp_numba is not None:
        _kernels.qp_numba(problems[0], 1e-8, 1e-6, 100_000)  # compile
        rows["numba"] = _time(lambda: sweep(_kernels.qp_numba), repeats)
    rows["numpy"] = _time(lambda: sweep(_kernels.qp_numpy), repeats)
    drift = abs(sweep(_kernels.qp_numba) - sweep(_kernels.qp_numpy)) if len(rows) == 2 else 0.0
    return rows, drift


def _print(section, rows, drift, unit_note):
    print(f"\n{section} ({unit_note})")
    base = rows["numpy"]
    for name in ("numba", "numpy"):
        if name not in rows:
            print(f"  {name:<6} unavailable")
            continue
        speedup = base / rows[name]
        print(f"  {name:<6} {rows[name] * 1e3:9.2f} ms   x{speedup:.1f} vs numpy")
    print(f"  result drift between backends: {drift:.2e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=20000, help="individuals in the batch")
    parser.add_argument("--T", type=int, default=10)
    parser.add_argument("--p", type=int, default=3)
    parser.add_argument("--qp-count", type=int, default=500, help="number of small QPs")
    parser.add_argument("--qp-size", type=int, default=40, help="constraints per QP")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"active backend for the package: {_kernels.active_backend()}")
    if _kernels.logdenom_numba is None:
        print("numba unavailable; only the numpy fallback is timed")

    rows, drift = bench_logdenom(args.n, args.T, args.p, args.repeats, rng)
    _print("log-denominator recursion", rows, drift,
           f"n={args.n}, T={args.T}, p={args.p}, best of {args.repeats}")

    rows, drift = bench_qp(args.qp_count, args.qp_size, args.p, args.repeats, rng)
    _print("projected-gradient QP", rows, drift,
           f"{args.qp_count} solves of m={args.qp_size}, p={args.p}, best of {args.repeats}")


if __name__ == "__main__":
    main()
