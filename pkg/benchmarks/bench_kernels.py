"""Benchmark the numba and numpy implementations of the hot kernels.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Covers the two O(large) inner loops: the Monte-Carlo path simulation and
the pairwise affinity construction.  Results are also sanity-checked for
equality across backends.  Set VESSELGROUP_NUMBA=0 to verify the engine
falls back cleanly (the numba column is then skipped).
"""

import argparse
import time

import numpy as np

from vesselgroup._accel import HAS_NUMBA
from vesselgroup.kernel import (
    IntensityParams,
    KernelParams,
    estimate_kernel,
    pairwise_omega_f,
)


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def bench_simulation(repeats):
    params = KernelParams(H=20, n_paths=200000, sigma=0.05, seed=0)
    rows = []
    grids = {}
    for backend in ("numpy", "numba") if HAS_NUMBA else ("numpy",):
        estimate_kernel(
            KernelParams(H=3, n_paths=100, sigma=0.05, seed=0), backend=backend
        )  # warm-up (JIT compile)
        secs, grid = timeit(lambda b=backend: estimate_kernel(params, b), repeats)
        rows.append((backend, secs))
        grids[backend] = grid
    if len(grids) == 2:
        assert np.array_equal(
            grids["numpy"].histogram, grids["numba"].histogram
        ), "backends disagree"
    return "path simulation (200k paths x 20 steps)", rows


def bench_affinity(repeats):
    grid = estimate_kernel(KernelParams(H=10, n_paths=100000, sigma=0.05, seed=0))
    rng = np.random.default_rng(1)
    n = 1500
    xs = rng.uniform(0, 60, n)
    ys = rng.uniform(0, 60, n)
    ths = rng.integers(0, 24, n) * np.pi / 24
    fs = rng.uniform(0, 1, n)
    ip = IntensityParams(0.1)
    rows = []
    mats = {}
    for backend in ("numpy", "numba") if HAS_NUMBA else ("numpy",):
        pairwise_omega_f(grid, xs[:10], ys[:10], ths[:10], fs[:10], ip,
                         backend=backend)  # warm-up
        secs, mat = timeit(
            lambda b=backend: pairwise_omega_f(grid, xs, ys, ths, fs, ip, b),
            repeats,
        )
        rows.append((backend, secs))
        mats[backend] = mat
    if len(mats) == 2:
        assert np.array_equal(mats["numpy"], mats["numba"]), "backends disagree"
    return f"pairwise affinity ({n} points, {n * (n - 1) // 2} pairs)", rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    if not HAS_NUMBA:
        print("numba not available: timing the numpy fallback only\n")
    for bench in (bench_simulation, bench_affinity):
        title, rows = bench(args.repeats)
        print(title)
        base = rows[0][1]
        for backend, secs in rows:
            speedup = base / secs
            print(f"  {backend:<6} {secs * 1e3:9.1f} ms   x{speedup:.1f}")
        print()


if __name__ == "__main__":
    main()
