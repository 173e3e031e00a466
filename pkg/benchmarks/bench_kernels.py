#!/usr/bin/env python3
"""Time the numba and numpy energy kernels, and a full auxiliary solve with each.

    python benchmarks/bench_kernels.py [--sizes 32 64 128] [--repeat 50]
"""
import argparse
import time

import numpy as np

from pxneumann import _kernels
from pxneumann.grid import Grid
from pxneumann.phases import build_phase_spec
from pxneumann.solver import SolverConfig, solve_auxiliary


def instance(n, seed=0):
    grid = Grid.unit_square(n)
    rng = np.random.default_rng(seed)
    spec = build_phase_spec(
        [(rng.uniform(0.5, 1.5, grid.shape), rng.uniform(1.6, 2.0, grid.shape)),
         (1.0, rng.uniform(2.0, 3.5, grid.shape))],
        grid,
    )
    return grid, spec, rng.random(grid.shape), rng.random(grid.shape)


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compile)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128, 256])
    ap.add_argument("--repeat", type=int, default=30)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable (or PXNEUMANN_NUMBA=0): only the numpy path is timed")

    print(f"{'n':>5} {'model':>5} {'numpy kernel':>13} {'numba kernel':>13} {'speedup':>8} {'rel dG':>9}")
    for n in args.sizes:
        grid, spec, V, g = instance(n)
        W, P = spec.stacked
        lam = np.ones(grid.shape)
        pe = spec.p_max.values
        for model in ("cell", "face"):
            def run(nb):
                return _kernels.energy_grad(model, V, g, lam, 0.0, pe, W, P, grid.hx, grid.hy, nb)

            t_np = best_of(lambda: run(False), args.repeat)
            if _kernels.HAVE_NUMBA:
                t_nb = best_of(lambda: run(True), args.repeat)
                G_np = run(False)[1]
                diff = float(np.max(np.abs(run(True)[1] - G_np)) / np.max(np.abs(G_np)))
                print(f"{n:>5} {model:>5} {t_np * 1e3:>11.3f}ms {t_nb * 1e3:>11.3f}ms {t_np / t_nb:>7.1f}x {diff:>9.1e}")
            else:
                print(f"{n:>5} {model:>5} {t_np * 1e3:>11.3f}ms {'-':>13} {'-':>8} {'-':>9}")

    print()
    print(f"{'n':>5} {'numpy solve':>12} {'numba solve':>12} {'iters':>6}")
    for n in args.sizes:
        grid, spec, _, g = instance(n)
        row = []
        for nb in (False, True):
            if nb and not _kernels.HAVE_NUMBA:
                row.append(float("nan"))
                continue
            cfg = SolverConfig(use_numba=nb)
            solve_auxiliary(g, spec, None, 1.0, cfg)  # warm-up
            t = time.perf_counter()
            rep = solve_auxiliary(g, spec, None, 1.0, cfg)
            row.append(time.perf_counter() - t)
        print(f"{n:>5} {row[0]:>11.3f}s {row[1]:>11.3f}s {rep.iters:>6}")


if __name__ == "__main__":
    main()
