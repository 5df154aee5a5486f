#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot paths (batch pursuit solves and KNN prediction) on
workloads shaped like the real datasets and prints a comparison table.

    python benchmarks/bench_backends.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bandsel import kernels


def time_call(fn, *args, repeats: int) -> float:
    fn(*args)  # warm-up (includes JIT compilation on the numba path)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_omp(rng, n_pixels, n_bands, sparsity, repeats):
    atoms = rng.normal(size=(n_bands, n_pixels))
    norms = np.linalg.norm(atoms, axis=1)
    results = {}
    for backend in ("numba", "numpy"):
        kernels.set_backend(backend)
        results[backend] = time_call(
            kernels.omp_solve_all, atoms, norms, sparsity, 0.0, repeats=repeats
        )
    kernels.set_backend(None)
    return results


def bench_knn(rng, n_train, n_test, n_features, k, repeats):
    train = rng.normal(size=(n_train, n_features))
    labels = rng.integers(0, 9, size=n_train).astype(np.int64)
    test = rng.normal(size=(n_test, n_features))
    results = {}
    for backend in ("numba", "numpy"):
        kernels.set_backend(backend)
        results[backend] = time_call(
            kernels.knn_predict, train, labels, test, k, 9, repeats=repeats
        )
    kernels.set_backend(None)
    return results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if not kernels._HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1

    rng = np.random.default_rng(0)
    rows = [
        ("pursuit 50px x 204 bands, k0=6", bench_omp(rng, 50, 204, 6, args.repeats)),
        ("pursuit 100px x 224 bands, k0=6", bench_omp(rng, 100, 224, 6, args.repeats)),
        ("knn 180 train x 5k test x 10 feat, k=6", bench_knn(rng, 180, 5_000, 10, 6, args.repeats)),
        ("knn 180 train x 42k test x 10 feat, k=9", bench_knn(rng, 180, 42_000, 10, 9, args.repeats)),
        ("knn 240 train x 9k test x 50 feat, k=12", bench_knn(rng, 240, 9_000, 50, 12, args.repeats)),
    ]

    print(f"{'workload':<42} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, res in rows:
        speedup = res["numpy"] / res["numba"] if res["numba"] > 0 else float("inf")
        print(f"{name:<42} {res['numba'] * 1e3:>8.2f}ms {res['numpy'] * 1e3:>8.2f}ms {speedup:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
