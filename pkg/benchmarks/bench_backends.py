"""Timing comparison of the kernel backends.

Runs every formula family over detuning grids of increasing size and times
the active backend (numba unless GIANTMOL_BACKEND says otherwise) against the
plain numpy evaluation path. Also times a full guarded sweep per coupling
layout so the end-to-end overhead (phase evaluation, guard scan, dataclass
assembly) is visible next to the raw kernel cost.

Usage:
    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --sizes 1000,100000 --repeats 5
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from giantmol import _kernels, closedform, model

CODES = {
    "sep/general": _kernels.SEP_GENERAL,
    "sep/equal": _kernels.SEP_EQUAL,
    "bra/general": _kernels.BRA_GENERAL,
    "bra/equal": _kernels.BRA_EQUAL,
    "nes/general": _kernels.NES_GENERAL,
    "nes/equal": _kernels.NES_EQUAL,
}

CONFIGS = {
    "separated": model.Configuration.separated(),
    "braided": model.Configuration.braided(),
    "nested": model.Configuration.nested(),
}


def best_of(fn, repeats: int) -> float:
    """Return the fastest wall time of ``repeats`` calls, in seconds."""
    fn()  # warm-up; compiles the numba path on first use
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_kernels(sizes: list[int], repeats: int) -> None:
    print(f"active backend: {_kernels.BACKEND}")
    if _kernels.BACKEND == "numpy":
        print("note: active backend is numpy, so both columns run the same code")
    print()
    header = f"{'kernel':<14}{'points':>10}{'active':>12}{'numpy':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, code in CODES.items():
        for size in sizes:
            deltas = np.linspace(-10.0, 10.0, size).astype(np.complex128)
            thetas = 0.3 * math.pi + 0.7 * deltas.real
            args = (code, deltas, thetas, 1.0, 1.7, 2.0)
            t_active = best_of(lambda: _kernels.evaluate_terms(*args), repeats)
            t_numpy = best_of(lambda: _kernels._evaluate_numpy(*args), repeats)
            print(f"{name:<14}{size:>10}{t_active * 1e3:>10.3f}ms"
                  f"{t_numpy * 1e3:>10.3f}ms{t_numpy / t_active:>9.2f}x")
    print()


def bench_sweeps(size: int, repeats: int) -> None:
    params = model.SystemParams(
        gamma1=1.0, gamma2=1.7, g=2.0,
        phase=model.PhaseModel.retarded(0.3, 0.7))
    grid = model.GridSpec(-10.0, 10.0, size)
    header = f"{'sweep':<14}{'points':>10}{'time':>12}{'per point':>14}"
    print(header)
    print("-" * len(header))
    for name, config in CONFIGS.items():
        t = best_of(lambda: closedform.sweep(config, params, grid), repeats)
        print(f"{name:<14}{size:>10}{t * 1e3:>10.3f}ms{t / size * 1e9:>12.1f}ns")
    print()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="1000,10000,100000,1000000",
                        help="comma-separated grid sizes for the kernel table")
    parser.add_argument("--sweep-size", type=int, default=100000,
                        help="grid size for the end-to-end sweep table")
    parser.add_argument("--repeats", type=int, default=7,
                        help="timed repetitions per cell; the best is kept")
    args = parser.parse_args(argv)

    sizes = [int(s) for s in args.sizes.split(",") if s]
    bench_kernels(sizes, args.repeats)
    bench_sweeps(args.sweep_size, args.repeats)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
