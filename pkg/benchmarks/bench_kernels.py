#!/usr/bin/env python3
"""Benchmarks the compiled interpolation kernel against the Python fallback.

Usage: python3 benchmarks/bench_kernels.py [n_queries]

Times single-query calls (the shape the simulator uses on its hot path)
and the batched entry point, and verifies both backends agree.
"""

import random
import sys
import time

import numpy as np

from hybridscale._kernels import BACKEND, _grid_py

try:
    from hybridscale._kernels import _grid_cy
except ImportError:
    _grid_cy = None


def make_grid():
    b = np.array([1.0, 2.0, 4.0, 8.0])
    s = np.array([25.0, 50.0, 75.0, 100.0])
    q = np.array([float(x) for x in range(10, 101, 10)])
    rng = random.Random(1)
    v = np.zeros((len(b), len(s), len(q)))
    for bi in range(len(b)):
        for si in range(len(s)):
            for qi in range(len(q)):
                v[bi, si, qi] = (10 + 4 * bi) * (2.0 - si * 0.3) * \
                    (1.5 - qi * 0.05) + rng.random() * 0.01
    # keep it monotone enough for realism; the kernel does not care
    return b, s, q, np.ascontiguousarray(v)


def time_single(mod, axes_values, coords):
    b, s, q, v = axes_values
    fn = mod.interp3
    start = time.perf_counter()
    acc = 0.0
    for cb, cs, cq in coords:
        acc += fn(b, s, q, v, cb, cs, cq)
    elapsed = time.perf_counter() - start
    return elapsed, acc


def time_batched(mod, axes_values, coords_arr, out):
    b, s, q, v = axes_values
    start = time.perf_counter()
    mod.interp3_many(b, s, q, v, coords_arr, out)
    return time.perf_counter() - start


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
    grid = make_grid()
    rng = random.Random(7)
    coords = [(rng.uniform(1, 8), rng.uniform(25, 100), rng.uniform(10, 100))
              for _ in range(n)]
    coords_arr = np.array(coords)
    out_py = np.zeros(n)

    print(f"active backend at import: {BACKEND}")
    t_py, acc_py = time_single(_grid_py, grid, coords)
    print(f"python  single-call: {n / t_py:12,.0f} queries/s  ({t_py:.3f}s)")
    tb_py = time_batched(_grid_py, grid, coords_arr, out_py)
    print(f"python  batched:     {n / tb_py:12,.0f} queries/s  ({tb_py:.3f}s)")

    if _grid_cy is None:
        print("cython  kernel not built (pip install -e . --no-build-isolation)")
        return
    t_cy, acc_cy = time_single(_grid_cy, grid, coords)
    print(f"cython  single-call: {n / t_cy:12,.0f} queries/s  ({t_cy:.3f}s)  "
          f"speedup x{t_py / t_cy:.1f}")
    out_cy = np.zeros(n)
    tb_cy = time_batched(_grid_cy, grid, coords_arr, out_cy)
    print(f"cython  batched:     {n / tb_cy:12,.0f} queries/s  ({tb_cy:.3f}s)  "
          f"speedup x{tb_py / tb_cy:.1f}")
    worst = float(np.max(np.abs(out_py - out_cy)))
    print(f"max |python - cython| over {n} queries: {worst:.3e}")
    assert worst == 0.0 or worst < 1e-12


if __name__ == "__main__":
    main()
