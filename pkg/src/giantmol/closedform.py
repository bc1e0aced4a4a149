"""Closed-form scattering amplitudes and the grid sweep engine.

The six formula sets (three configurations, general-rate and equal-rate
variants) live in :mod:`giantmol._kernels`; this module wraps them in
the domain types, applies the degeneracy guard and drives grid sweeps.

Near a handful of parameter points the literal formulas hit a pole-zero
cancellation: numerator and denominator vanish together and plain
double-precision division returns garbage.  Whenever |den| drops below
``DEN_GUARD`` the point is recomputed through the independent
real-space solver; if that system is itself degenerate (a bound state
in the continuum), the removable limit is taken with a symmetric
three-point stencil centered on the requested detuning.  Every such
fallback is recorded in the sweep metadata.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels, realspace
from .model import (
    Configuration,
    GiantmolError,
    GridSpec,
    ScatterPoint,
    Spectrum,
    SweepInfo,
    SystemParams,
    Topology,
    effective_detuning,
    phase_shift,
)

__all__ = [
    "FormulaVariant",
    "IncompatibleVariant",
    "BadGrid",
    "DEN_GUARD",
    "NUDGE",
    "default_variant",
    "raw_terms",
    "amplitudes",
    "scatter_point",
    "reflection_at",
    "sweep",
]

# |den| below this is treated as a degenerate evaluation point.
DEN_GUARD = 1e-12

# Detuning shift used when even the real-space system is singular.
NUDGE = 1e-9

# Sweeps shorter than this stay single-threaded; the thread-pool setup
# costs more than it saves on small grids.
_THREAD_CUTOFF = 8192


class IncompatibleVariant(GiantmolError, ValueError):
    """Equal-rate formulas requested while gamma1 != gamma2."""


class BadGrid(GiantmolError, ValueError):
    """Sweep grid violates its preconditions."""


class FormulaVariant(enum.Enum):
    """Which of the two published formula families to evaluate."""

    GENERAL_GAMMA = "general"
    EQUAL_GAMMA = "equal"


_CODE = {
    (Topology.SEPARATED, FormulaVariant.GENERAL_GAMMA): _kernels.SEP_GENERAL,
    (Topology.SEPARATED, FormulaVariant.EQUAL_GAMMA): _kernels.SEP_EQUAL,
    (Topology.BRAIDED, FormulaVariant.GENERAL_GAMMA): _kernels.BRA_GENERAL,
    (Topology.BRAIDED, FormulaVariant.EQUAL_GAMMA): _kernels.BRA_EQUAL,
    (Topology.NESTED, FormulaVariant.GENERAL_GAMMA): _kernels.NES_GENERAL,
    (Topology.NESTED, FormulaVariant.EQUAL_GAMMA): _kernels.NES_EQUAL,
}


def default_variant(params: SystemParams) -> FormulaVariant:
    """Equal-rate formulas when the rates match, general otherwise."""
    return FormulaVariant.EQUAL_GAMMA if params.equal_gamma else FormulaVariant.GENERAL_GAMMA


def _resolve(config: Configuration, params: SystemParams,
             variant: FormulaVariant | None) -> tuple[int, FormulaVariant]:
    if variant is None:
        variant = default_variant(params)
    if variant is FormulaVariant.EQUAL_GAMMA and not params.equal_gamma:
        raise IncompatibleVariant(
            f"equal-rate formulas need gamma1 == gamma2, "
            f"got {params.gamma1} and {params.gamma2}"
        )
    return _CODE[(config.kind, variant)], variant


def raw_terms(config: Configuration, params: SystemParams, delta: float,
              variant: FormulaVariant | None = None) -> tuple[complex, complex, complex]:
    """Numerators and denominator of (t, r) = (num_t, num_r) / den."""
    code, _ = _resolve(config, params, variant)
    theta = phase_shift(params, float(delta))
    de = effective_detuning(params, float(delta))
    return _kernels.evaluate_terms_scalar(code, de, theta,
                                          params.gamma1, params.gamma2, params.g)


def amplitudes(config: Configuration, params: SystemParams, delta: float,
               variant: FormulaVariant | None = None) -> tuple[complex, complex]:
    """Literal, unguarded evaluation of the transmission and reflection."""
    num_t, num_r, den = raw_terms(config, params, delta, variant)
    return num_t / den, num_r / den


def _limit_amplitudes(config: Configuration, params: SystemParams, delta: float,
                      variant: FormulaVariant | None) -> tuple[complex, complex]:
    """Pole-zero limit of the literal formulas at a degenerate point.

    At constant phase both numerators and the shared denominator are
    polynomials of degree at most two in the detuning, so a centered
    three-point stencil recovers their local Taylor coefficients
    exactly up to rounding.  The limiting amplitude is the ratio of
    the lowest-order coefficients at which the denominator is
    resolved.  With delay the stencil is only a local quadratic model,
    hence the much smaller step.
    """
    h = 1.0 if params.phase.markovian else 1e-5
    below = raw_terms(config, params, delta - h, variant)
    here = raw_terms(config, params, delta, variant)
    above = raw_terms(config, params, delta + h, variant)
    slopes = [(above[i] - below[i]) / (2.0 * h) for i in range(3)]
    curvs = [(above[i] + below[i] - 2.0 * here[i]) / (2.0 * h * h) for i in range(3)]

    scale = max(abs(slopes[2]), abs(curvs[2]))
    if scale == 0.0 or not math.isfinite(scale):
        raise realspace.SingularSystem(
            f"denominator vanishes identically near delta={delta:.17g}")
    if abs(slopes[2]) >= 1e-6 * scale:
        return slopes[0] / slopes[2], slopes[1] / slopes[2]
    return curvs[0] / curvs[2], curvs[1] / curvs[2]


def scatter_point(config: Configuration, params: SystemParams, delta: float,
                  variant: FormulaVariant | None = None
                  ) -> tuple[ScatterPoint, str | None, float]:
    """Guarded single-point evaluation.

    Returns (point, note, delta_used).  note is None on the fast path;
    otherwise it describes which fallback produced the value.
    delta_used reports where the amplitudes were evaluated; every
    fallback is centered on the requested detuning, so it equals delta.
    """
    delta = float(delta)
    num_t, num_r, den = raw_terms(config, params, delta, variant)
    if abs(den) >= DEN_GUARD:
        return ScatterPoint.from_amplitudes(delta, num_t / den, num_r / den), None, delta

    try:
        t, r = realspace.amplitudes(config, params, delta)
        note = (f"delta={delta:.17g}: formula denominator {abs(den):.3e} "
                f"below {DEN_GUARD:g}; recomputed via real-space solve")
        return ScatterPoint.from_amplitudes(delta, t, r), note, delta
    except realspace.SingularSystem:
        pass

    t, r = _limit_amplitudes(config, params, delta, variant)
    note = (f"delta={delta:.17g}: removable singularity; "
            "limit taken by symmetric interpolation")
    return ScatterPoint.from_amplitudes(delta, t, r), note, delta


def reflection_at(config: Configuration, params: SystemParams, delta: float,
                  variant: FormulaVariant | None = None) -> float:
    """Guarded reflection coefficient at one detuning."""
    point, _, _ = scatter_point(config, params, delta, variant)
    return point.R


def _thread_count(steps: int) -> int:
    env = os.environ.get("GIANTMOL_THREADS", "").strip()
    if env:
        try:
            workers = int(env)
        except ValueError:
            raise GiantmolError(f"GIANTMOL_THREADS must be an integer, got {env!r}")
        if workers < 1:
            raise GiantmolError(f"GIANTMOL_THREADS must be >= 1, got {workers}")
        return workers
    if steps < _THREAD_CUTOFF:
        return 1
    return min(4, os.cpu_count() or 1)


def sweep(config: Configuration, params: SystemParams, grid: GridSpec,
          variant: FormulaVariant | None = None) -> Spectrum:
    """Evaluate a full spectrum over a uniform detuning grid.

    Grid points where the formula denominator collapses are recomputed
    through the guarded path and listed in ``metadata.notes``.
    """
    if not (math.isfinite(grid.delta_min) and math.isfinite(grid.delta_max)):
        raise BadGrid(f"grid bounds must be finite, got [{grid.delta_min}, {grid.delta_max}]")
    if grid.delta_min >= grid.delta_max:
        raise BadGrid(f"grid needs delta_min < delta_max, got [{grid.delta_min}, {grid.delta_max}]")
    if not 2 <= grid.steps <= 10_000_000:
        raise BadGrid(f"grid steps must lie in [2, 1e7], got {grid.steps}")

    code, variant = _resolve(config, params, variant)
    deltas = grid.deltas()
    thetas = np.asarray(phase_shift(params, deltas), dtype=float)
    deltas_eff = deltas + 1j * params.kappa

    workers = _thread_count(grid.steps)
    if workers == 1:
        num_t, num_r, den = _kernels.evaluate_terms(
            code, deltas_eff, thetas, params.gamma1, params.gamma2, params.g)
    else:
        bounds = np.linspace(0, grid.steps, workers + 1).astype(int)
        chunks = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(
                lambda span: _kernels.evaluate_terms(
                    code, deltas_eff[span[0]:span[1]], thetas[span[0]:span[1]],
                    params.gamma1, params.gamma2, params.g),
                chunks))
        num_t = np.concatenate([p[0] for p in parts])
        num_r = np.concatenate([p[1] for p in parts])
        den = np.concatenate([p[2] for p in parts])

    with np.errstate(divide="ignore", invalid="ignore"):
        t_amp = num_t / den
        r_amp = num_r / den

    notes: list[str] = []
    points: list[ScatterPoint] = []
    guard_mask = np.abs(den) < DEN_GUARD
    for i, delta in enumerate(deltas):
        if guard_mask[i]:
            point, note, _ = scatter_point(config, params, float(delta), variant)
            if note is not None:
                notes.append(note)
            points.append(point)
        else:
            points.append(ScatterPoint.from_amplitudes(float(delta), t_amp[i], r_amp[i]))

    info = SweepInfo(grid=grid, variant=variant.value, backend=_kernels.BACKEND,
                     threads=workers, notes=tuple(notes))
    return Spectrum(config=config, params=params, points=tuple(points), metadata=info)
