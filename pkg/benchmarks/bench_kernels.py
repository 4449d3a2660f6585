"""Benchmark the compiled segmentation kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--n 1200] [--dim 64] [--k 12]

Times the exact dynamic program and a full greedy split-scan on one
synthetic document per backend and prints the speedup.  Only backends
that are importable get benchmarked (build the extension with
`python setup.py build_ext --inplace`).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from pressclaims._kernels import available_backends


def make_prefix(n: int, dim: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    # a handful of topic blocks so the optimizers do real work
    centers = rng.normal(size=(8, dim))
    assignments = np.repeat(np.arange(8), n // 8 + 1)[:n]
    matrix = centers[assignments] + 0.3 * rng.normal(size=(n, dim))
    prefix = np.zeros((n + 1, dim))
    np.cumsum(matrix, axis=0, out=prefix[1:])
    return np.ascontiguousarray(prefix)


def time_call(fn, *args, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_exact(impl, prefix, k):
    return time_call(impl.exact_dp, prefix, k, 1)


def bench_greedy_scan(impl, prefix):
    # one full pass of best-split scans, the greedy splitter's inner loop
    n = prefix.shape[0] - 1

    def scan():
        step = max(1, n // 16)
        for start in range(0, n - 1, step):
            impl.best_split(prefix, start, n, 1)

    return time_call(scan)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=1200, help="sentences per document")
    parser.add_argument("--dim", type=int, default=64, help="embedding dimension")
    parser.add_argument("--k", type=int, default=12, help="segments for the exact DP")
    args = parser.parse_args()

    backends = available_backends()
    print(f"backends: {', '.join(backends)}  (n={args.n}, dim={args.dim}, k={args.k})")
    prefix = make_prefix(args.n, args.dim)

    results: dict[str, dict[str, float]] = {}
    for name, impl in backends.items():
        results[name] = {
            "exact_dp": bench_exact(impl, prefix, args.k),
            "greedy_scan": bench_greedy_scan(impl, prefix),
        }

    header = f"{'kernel':<14}" + "".join(f"{name:>12}" for name in results)
    if len(results) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for kernel in ("exact_dp", "greedy_scan"):
        row = f"{kernel:<14}"
        times = [results[name][kernel] for name in results]
        row += "".join(f"{t * 1000:>10.1f}ms" for t in times)
        if len(times) == 2:
            slow, fast = max(times), min(times)
            faster = min(results, key=lambda n: results[n][kernel])
            row += f"{slow / fast:>8.1f}x ({faster})"
        print(row)

    for name, impl in backends.items():
        objective, bounds = impl.exact_dp(prefix, args.k, 1)
        print(f"{name}: objective={objective:.6f} first_bounds={bounds[:4]}")


if __name__ == "__main__":
    main()
