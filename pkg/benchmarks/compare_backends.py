"""Time the numpy and compiled stencil kernels on matched workloads.

Run after installing the package:

    python benchmarks/compare_backends.py [--repeat 5]

Each case applies a discretized convolution stencil to a smooth field,
using the exact arrays the solvers would pass.  Both implementations are
exercised on identical inputs; the table reports best-of-repeat wall
times and the speedup of the compiled extension (when it is built).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sktlab import Grid, KernelFamily, compute_c1, discretize, make_profile
from sktlab import _kernels_py

try:
    from sktlab import _kernels_cy
except ImportError:
    _kernels_cy = None


def _case_1d(cells: int, scale: int):
    grid = Grid(1, 1.0, cells)
    profile = make_profile(KernelFamily.POLYNOMIAL_BUMP, 0.25, 1)
    kernel = discretize(profile, compute_c1(profile), scale, grid)
    x = grid.cell_centers()
    values = np.cos(2.0 * np.pi * x) + 1.5
    offsets = np.ascontiguousarray(kernel.offsets[:, 0])
    out = np.empty_like(values)
    label = f"1d cells={cells} scale={scale} taps={len(kernel.weights)}"
    return label, lambda mod: mod.stencil_apply_1d(values, offsets, kernel.weights, out)


def _case_2d(cells: int, scale: int):
    grid = Grid(2, 1.0, cells)
    profile = make_profile(KernelFamily.POLYNOMIAL_BUMP, 0.25, 2)
    kernel = discretize(profile, compute_c1(profile), scale, grid)
    xx, yy = grid.coordinate_arrays()
    values = np.cos(2.0 * np.pi * xx) * np.cos(2.0 * np.pi * yy) + 1.5
    off_x = np.ascontiguousarray(kernel.offsets[:, 0])
    off_y = np.ascontiguousarray(kernel.offsets[:, 1])
    out = np.empty_like(values)
    label = f"2d cells={cells}^2 scale={scale} taps={len(kernel.weights)}"
    return label, lambda mod: mod.stencil_apply_2d(values, off_x, off_y, kernel.weights, out)


def _best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    cases = [
        _case_1d(4096, 4),
        _case_1d(4096, 16),
        _case_1d(16384, 8),
        _case_2d(256, 4),
        _case_2d(256, 8),
    ]

    print(f"{'case':42s} {'numpy':>12s} {'compiled':>12s} {'speedup':>9s}")
    for label, runner in cases:
        t_py = _best_time(lambda: runner(_kernels_py), args.repeat)
        if _kernels_cy is None:
            print(f"{label:42s} {t_py * 1e3:10.3f}ms {'missing':>12s} {'':>9s}")
            continue
        t_cy = _best_time(lambda: runner(_kernels_cy), args.repeat)
        print(
            f"{label:42s} {t_py * 1e3:10.3f}ms {t_cy * 1e3:10.3f}ms "
            f"{t_py / t_cy:8.2f}x"
        )
    if _kernels_cy is None:
        print("\ncompiled extension not built; showing numpy backend only")


if __name__ == "__main__":
    main()
