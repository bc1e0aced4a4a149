"""Spectral structure analysis.

Closed-form peak and dip locators for the constant-phase regime, the
two-Lorentzian reflection decomposition with its standard-form Fano
approximation, the near-decoupling Rabi approximants for the braided
layout, and a bracketing root finder for the delay-dependent
transcendental peak conditions.

Every analytic candidate is verified by evaluating the actual guarded
reflection coefficient before being reported: the peak formulas come
from zeroing the transmission numerator, which silently admits
pole-zero cancellations where no physical peak exists.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .closedform import FormulaVariant, reflection_at, scatter_point, sweep
from .model import (
    Configuration,
    GiantmolError,
    GridSpec,
    Spectrum,
    SystemParams,
    Topology,
    phase_shift,
)

__all__ = [
    "NotApplicable",
    "DeltaTooLarge",
    "EmptyRange",
    "TooFewPoints",
    "Extremum",
    "PeakReport",
    "FanoComponents",
    "RabiBranch",
    "peak_candidates",
    "markovian_peaks",
    "markovian_dip",
    "peak_separation",
    "fano_components",
    "lorentzian_pair",
    "fano_decomposition_residual",
    "fano_lineshape",
    "narrow_resonance",
    "rabi_approx_braided",
    "exchange_coupling",
    "nonmarkovian_extrema",
    "numerical_extrema",
]

# A verified complete-reflection peak must actually reach R = 1.
PEAK_TOL = 1e-8

# Scan-refined extrema cannot hit PEAK_TOL; they get a looser bound that
# still separates genuine unit peaks from partial-reflection maxima.
SCAN_PEAK_TOL = 1e-6

# A reported dip must be an actual reflection zero.
DIP_TOL = 1e-8


class NotApplicable(GiantmolError):
    """The requested analysis has no formula for these parameters."""


class DeltaTooLarge(GiantmolError, ValueError):
    """Phase offset from the decoupling point outside the trusted range."""


class EmptyRange(GiantmolError, ValueError):
    """Scan range is empty or inverted."""


class TooFewPoints(GiantmolError, ValueError):
    """Spectrum has too few samples for extremum detection."""


@dataclass(frozen=True)
class Extremum:
    """One located extremum of the reflection coefficient."""

    delta: float
    R_at: float
    verified: bool


@dataclass(frozen=True)
class PeakReport:
    """Peaks and dips of a reflection spectrum.

    ``center`` and ``radicand`` echo the analytic candidate formula
    delta = center +- sqrt(radicand) when one applies (constant-phase
    reports only); ``scan_max_R`` is filled by scan-based reports.
    """

    peaks: tuple[Extremum, ...]
    dips: tuple[Extremum, ...] = ()
    separation: float | None = None
    condition_met: bool = False
    center: float | None = None
    radicand: float | None = None
    scan_max_R: float | None = None

    @property
    def dip(self) -> Extremum | None:
        """The deepest reported dip, if any."""
        return min(self.dips, key=lambda e: e.R_at) if self.dips else None

    @property
    def verified_peaks(self) -> tuple[Extremum, ...]:
        return tuple(p for p in self.peaks if p.verified)


def _require_equal_markovian(params: SystemParams, what: str) -> float:
    if not params.equal_gamma:
        raise NotApplicable(
            f"{what} is only available for gamma1 == gamma2; "
            f"use numerical_extrema for unequal rates")
    if not params.phase.markovian:
        raise NotApplicable(
            f"{what} assumes a constant phase; use nonmarkovian_extrema "
            f"when the delay matters")
    return params.gamma1


# ---------------------------------------------------------------------------
# Complete-reflection candidates: delta = center(theta) +- sqrt(radicand(theta))
# ---------------------------------------------------------------------------


def _center_radicand(kind: Topology, gamma: float, g: float, theta):
    """Candidate-peak center and radicand at phase theta (array-safe)."""
    if kind is Topology.SEPARATED:
        center = 2 * gamma * np.sin(theta)
        radicand = g * g + 4 * g * gamma * np.sin(2 * theta) * (1 + np.cos(theta))
    elif kind is Topology.BRAIDED:
        center = 2 * gamma * np.sin(2 * theta)
        radicand = (4 * gamma ** 2 * (1 - np.cos(theta) * np.cos(3 * theta))
                    + g * g + 2 * g * gamma * (3 * np.sin(theta) + np.sin(3 * theta)))
    else:
        center = gamma * (np.sin(theta) + np.sin(3 * theta))
        radicand = (gamma ** 2 * (np.sin(theta) - np.sin(3 * theta)) ** 2
                    + (g + 2 * gamma * (np.sin(theta) + np.sin(2 * theta))) ** 2)
    return center, radicand


def peak_candidates(config: Configuration, params: SystemParams) -> tuple[float, float]:
    """Center and radicand of the complete-reflection condition."""
    gamma = _require_equal_markovian(params, "the candidate-peak formula")
    center, radicand = _center_radicand(config.kind, gamma, params.g,
                                        params.phase.theta0)
    return float(center), float(radicand)


def markovian_peaks(config: Configuration, params: SystemParams) -> PeakReport:
    """Locate and verify the complete-reflection peaks at constant phase."""
    center, radicand = peak_candidates(config, params)
    condition_met = radicand >= 0.0

    candidates: list[float] = []
    if condition_met:
        if radicand == 0.0:
            candidates = [center]
        else:
            half = math.sqrt(radicand)
            candidates = [center - half, center + half]

    peaks = []
    for delta in candidates:
        r_val = reflection_at(config, params, delta, FormulaVariant.EQUAL_GAMMA)
        peaks.append(Extremum(delta=delta, R_at=r_val, verified=r_val >= 1.0 - PEAK_TOL))

    separation = None
    if condition_met and peaks and all(p.verified for p in peaks):
        separation = 2.0 * math.sqrt(radicand)

    dips = ()
    dip_delta = markovian_dip(config, params)
    if dip_delta is not None:
        dips = (Extremum(delta=dip_delta,
                         R_at=reflection_at(config, params, dip_delta,
                                            FormulaVariant.EQUAL_GAMMA),
                         verified=True),)

    return PeakReport(peaks=tuple(peaks), dips=dips, separation=separation,
                      condition_met=condition_met, center=center, radicand=radicand)


def markovian_dip(config: Configuration, params: SystemParams) -> float | None:
    """Reflection-zero location at constant phase, or None.

    None is returned when the dip formula degenerates (vanishing
    denominator), when the whole reflection amplitude is killed by its
    prefactor (odd multiples of pi for the separated and nested
    layouts), or when the formula's candidate fails the R <= 1e-8
    check (pole-zero points have no actual zero).
    """
    gamma = _require_equal_markovian(params, "the dip formula")
    theta0 = params.phase.theta0
    g = params.g

    if config.kind in (Topology.SEPARATED, Topology.NESTED):
        if abs(1 + math.cos(theta0)) < 1e-12:
            return None  # reflection vanishes identically

    if config.kind is Topology.SEPARATED:
        den = math.cos(2 * theta0)
        if abs(den) < 1e-9:
            return None
        dip = -(2 * gamma * (math.sin(theta0) + math.sin(2 * theta0)) + g) / den
    elif config.kind is Topology.BRAIDED:
        den = math.cos(theta0)
        if abs(den) < 1e-9:
            return None
        dip = -2 * gamma * math.tan(theta0) - g / den
    else:
        num = (g * (1 - 2 * math.cos(theta0))
               - 2 * gamma * (math.sin(2 * theta0) - math.sin(theta0)))
        den = 2 - 2 * math.cos(theta0) + math.cos(2 * theta0)
        if abs(den) < 1e-9:
            return None  # unreachable for real theta0; kept for symmetry
        dip = num / den

    r_val = reflection_at(config, params, dip, FormulaVariant.EQUAL_GAMMA)
    if r_val > DIP_TOL:
        return None
    return float(dip)


def peak_separation(config: Configuration, params: SystemParams) -> float | None:
    """Distance between the two verified complete-reflection peaks."""
    return markovian_peaks(config, params).separation


# ---------------------------------------------------------------------------
# Two-Lorentzian reflection decomposition and its Fano standard form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FanoComponents:
    """Parameters of the exact two-Lorentzian reflection decomposition.

    lambda_/gamma_ are the centers and half-widths of the two
    sub-resonances, q_ the asymmetry parameters and c_ the modified
    coefficients of the corresponding standard-form approximations.
    """

    lambda_plus: float
    lambda_minus: float
    gamma_plus: float
    gamma_minus: float
    q_plus: float
    q_minus: float
    c_plus: float
    c_minus: float

    @property
    def width_ratio(self) -> float:
        """Broad-to-narrow half-width ratio (inf when one width is zero)."""
        lo = min(self.gamma_plus, self.gamma_minus)
        hi = max(self.gamma_plus, self.gamma_minus)
        if lo == 0.0:
            return math.inf if hi > 0.0 else math.nan
        return hi / lo

    @property
    def narrow_branch(self) -> str:
        """'plus' or 'minus': which sub-resonance is the narrow one."""
        return "plus" if self.gamma_plus < self.gamma_minus else "minus"


def _safe_q(dlam: float, gam: float) -> float:
    if gam > 0.0:
        return dlam / gam
    if dlam == 0.0:
        return 0.0
    return math.copysign(math.inf, dlam)


def _safe_c(dlam: float, gam: float) -> float:
    denom = dlam * dlam + gam * gam
    return (gam * gam) / denom if denom > 0.0 else 0.0


def fano_components(config: Configuration, params: SystemParams) -> FanoComponents:
    """Centers, half-widths and Fano parameters of the decomposition."""
    gamma = _require_equal_markovian(params, "the two-Lorentzian decomposition")
    if config.kind is Topology.NESTED:
        raise NotApplicable("no two-Lorentzian decomposition exists for the "
                            "nested layout; it applies to separated and braided")
    th = params.phase.theta0

    if config.kind is Topology.SEPARATED:
        lam_p = 2 * gamma * math.sin(th) * (1 + 2 * math.cos(th) + 2 * math.cos(th) ** 2)
        lam_m = 2 * gamma * math.sin(th) * (1 - 2 * math.cos(th) - 2 * math.cos(th) ** 2)
        gam_p = 2 * gamma * (1 + math.cos(th)) * (1 + math.cos(2 * th))
        gam_m = 2 * gamma * (1 + math.cos(th)) * (1 - math.cos(2 * th))
    else:
        lam_p = gamma * (2 * math.sin(2 * th) + 3 * math.sin(th) + math.sin(3 * th))
        lam_m = gamma * (2 * math.sin(2 * th) - 3 * math.sin(th) - math.sin(3 * th))
        gam_p = 2 * gamma * (1 + math.cos(2 * th)) * (1 + math.cos(th))
        gam_m = 2 * gamma * (1 + math.cos(2 * th)) * (1 - math.cos(th))

    # Both products are squares times positive factors; clamp the tiny
    # negative rounding residue so downstream sqrt/ratios stay clean.
    gam_p = max(gam_p, 0.0)
    gam_m = max(gam_m, 0.0)

    return FanoComponents(
        lambda_plus=lam_p,
        lambda_minus=lam_m,
        gamma_plus=gam_p,
        gamma_minus=gam_m,
        q_plus=_safe_q(lam_p - lam_m, gam_p),
        q_minus=_safe_q(lam_m - lam_p, gam_m),
        c_plus=_safe_c(lam_p - lam_m, gam_p),
        c_minus=_safe_c(lam_m - lam_p, gam_m),
    )


def lorentzian_pair(config: Configuration, params: SystemParams,
                    delta: float) -> tuple[complex, complex]:
    """The two Lorentzian reflection amplitudes r_plus and r_minus.

    Their sum reproduces the closed-form reflection amplitude exactly:

        r_+ = +e^{3 i theta0} Gamma_+ / [i((delta - g) - Lambda_+) - Gamma_+]
        r_- = -e^{3 i theta0} Gamma_- / [i((delta + g) - Lambda_-) - Gamma_-]
    """
    comps = fano_components(config, params)
    th = params.phase.theta0
    g = params.g
    front = np.exp(3j * th)

    if comps.gamma_plus == 0.0:
        r_plus = 0.0 + 0.0j
    else:
        r_plus = front * comps.gamma_plus / (
            1j * ((delta - g) - comps.lambda_plus) - comps.gamma_plus)
    if comps.gamma_minus == 0.0:
        r_minus = 0.0 + 0.0j
    else:
        r_minus = -front * comps.gamma_minus / (
            1j * ((delta + g) - comps.lambda_minus) - comps.gamma_minus)
    return complex(r_plus), complex(r_minus)


def fano_decomposition_residual(config: Configuration, params: SystemParams,
                                grid: GridSpec) -> float:
    """Max |r_closedform - (r_+ + r_-)| over the grid (should be ~1e-15)."""
    worst = 0.0
    for delta in grid.deltas():
        point, _, used = scatter_point(config, params, float(delta),
                                       FormulaVariant.EQUAL_GAMMA)
        r_plus, r_minus = lorentzian_pair(config, params, used)
        worst = max(worst, abs(point.r - (r_plus + r_minus)))
    return worst


def narrow_resonance(config: Configuration, params: SystemParams
                     ) -> tuple[float, float, float]:
    """(lambda_narrow, gamma_narrow, resonance center in delta).

    The narrow sub-resonance peaks where its own detuning argument
    vanishes, which in the bare delta axis sits at Lambda_- - g for the
    minus branch and Lambda_+ + g for the plus branch.
    """
    comps = fano_components(config, params)
    if comps.narrow_branch == "minus":
        return comps.lambda_minus, comps.gamma_minus, comps.lambda_minus - params.g
    return comps.lambda_plus, comps.gamma_plus, comps.lambda_plus + params.g


def fano_lineshape(config: Configuration, params: SystemParams, delta) -> float:
    """Standard-form Fano approximation R = C (q + eps)^2 / (1 + eps^2).

    eps is the reduced detuning of the narrow sub-resonance; q and C are
    the asymmetry parameter and modified coefficient of the broad
    background.  Accepts scalar or ndarray delta.
    """
    comps = fano_components(config, params)
    g = params.g
    if comps.narrow_branch == "minus":
        gam_n, lam_n = comps.gamma_minus, comps.lambda_minus
        q, c = comps.q_plus, comps.c_plus
        arg = np.asarray(delta, dtype=float) + g
    else:
        gam_n, lam_n = comps.gamma_plus, comps.lambda_plus
        q, c = comps.q_minus, comps.c_minus
        arg = np.asarray(delta, dtype=float) - g
    if gam_n == 0.0:
        out = np.full_like(arg, c)
        return float(out) if out.ndim == 0 else out
    eps = (arg - lam_n) / gam_n
    out = c * (q + eps) ** 2 / (1 + eps ** 2)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Near-decoupling Rabi approximants (braided layout)
# ---------------------------------------------------------------------------


class RabiBranch(enum.Enum):
    """Which decoupling point the phase is expanded around."""

    HALF_PI = "half_pi"
    THREE_HALF_PI = "three_half_pi"


# Trusted size of the phase offset from the decoupling point (radians).
_RABI_DELTA_MAX = 0.1 * math.pi


def rabi_approx_braided(params: SystemParams, delta_phase: float,
                        branch: RabiBranch, delta) -> tuple[complex, complex]:
    """Approximate braided amplitudes near theta0 = pi/2 or 3 pi/2.

    delta_phase is the offset of theta0 from the decoupling point in
    radians.  The effective coupling is g + 2 gamma on the HALF_PI
    branch and g - 2 gamma on the THREE_HALF_PI branch; approximate
    reflection peaks sit at delta = -4 gamma delta_phase +- |coupling|.
    """
    if not params.equal_gamma:
        raise NotApplicable("the near-decoupling approximants assume "
                            "gamma1 == gamma2")
    if abs(delta_phase) > _RABI_DELTA_MAX:
        raise DeltaTooLarge(
            f"|delta_phase| = {abs(delta_phase):.4g} exceeds the trusted "
            f"range {_RABI_DELTA_MAX:.4g} rad")
    gamma = params.gamma1
    sign = 1.0 if branch is RabiBranch.HALF_PI else -1.0
    coupling = params.g + sign * 2 * gamma

    if delta_phase == 0.0:
        # The numerators and denominator coincide exactly: full transmission.
        return 1.0 + 0.0j, 0.0 + 0.0j

    x = delta + 4 * gamma * delta_phase
    den = 1j * x * (1j * x - 8 * gamma * delta_phase ** 2) + coupling ** 2
    t = (-(x ** 2) + coupling ** 2) / den
    r = (8 * gamma * coupling * delta_phase ** 2) / den
    return t, r


def exchange_coupling(theta0: float, gamma: float = 1.0) -> float:
    """Waveguide-mediated exchange interaction for the braided layout."""
    return gamma * (3 * math.sin(theta0) + math.sin(3 * theta0))


# ---------------------------------------------------------------------------
# Delay-dependent (transcendental) extrema
# ---------------------------------------------------------------------------


def _golden_minimize(fn, lo: float, hi: float, iters: int = 70) -> tuple[float, float]:
    """Golden-section minimum of fn on [lo, hi]; returns (x, fn(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return (c, fc) if fc <= fd else (d, fd)


def nonmarkovian_extrema(config: Configuration, params: SystemParams,
                         delta_min: float, delta_max: float,
                         scan_points: int = 2000,
                         root_tol: float = 1e-10) -> PeakReport:
    """Peaks and dips of the delayed-feedback reflection spectrum.

    The complete-reflection condition becomes transcendental once the
    phase depends on the detuning: delta = center(theta(delta)) +-
    sqrt(radicand(theta(delta))).  Both branches are scanned for sign
    changes on a uniform grid and each bracket is bisected until
    |f| <= root_tol; samples with a negative radicand are skipped.
    Every root is then verified against the actual reflection.  Dips
    are local scan minima below 1e-6, refined by golden section and
    kept only if the refined reflection is at most 1e-8.
    """
    if params.phase.markovian or params.phase.tau == 0.0:
        raise NotApplicable("the transcendental peak conditions need a "
                            "nonzero delay; use markovian_peaks instead")
    if not params.equal_gamma:
        raise NotApplicable("the transcendental peak conditions assume "
                            "gamma1 == gamma2")
    if not (math.isfinite(delta_min) and math.isfinite(delta_max)
            and delta_min < delta_max):
        raise EmptyRange(f"need delta_min < delta_max, got [{delta_min}, {delta_max}]")
    if scan_points < 2:
        raise EmptyRange(f"scan needs at least 2 points, got {scan_points}")

    gamma = params.gamma1
    g = params.g
    kind = config.kind

    xs = np.linspace(delta_min, delta_max, scan_points)
    thetas = np.asarray(phase_shift(params, xs), dtype=float)
    centers, radicands = _center_radicand(kind, gamma, g, thetas)
    valid = radicands >= 0.0
    condition_met = bool(valid.any())

    def branch_f(sign: float):
        def f(d: float) -> float:
            th = phase_shift(params, d)
            c, q = _center_radicand(kind, gamma, g, th)
            if q < 0.0:
                return math.nan
            return d - (c + sign * math.sqrt(q))
        return f

    roots: list[float] = []
    with np.errstate(invalid="ignore"):
        sqrts = np.sqrt(np.where(valid, radicands, np.nan))
    for sign in (1.0, -1.0):
        fvals = xs - (centers + sign * sqrts)
        f = branch_f(sign)
        for i in range(scan_points - 1):
            if not (valid[i] and valid[i + 1]):
                continue
            fa, fb = float(fvals[i]), float(fvals[i + 1])
            if fa == 0.0:
                roots.append(float(xs[i]))
                continue
            if fa * fb >= 0.0:
                continue
            lo, hi = float(xs[i]), float(xs[i + 1])
            root = None
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                fm = f(mid)
                if not math.isfinite(fm):
                    break
                if abs(fm) <= root_tol:
                    root = mid
                    break
                if fa * fm < 0.0:
                    hi = mid
                else:
                    lo, fa = mid, fm
            if root is not None:
                roots.append(root)
        if valid[-1] and float(fvals[-1]) == 0.0:
            roots.append(float(xs[-1]))

    # Merge duplicates found by both branches or adjacent brackets.
    roots.sort()
    merged: list[float] = []
    for root in roots:
        if not merged or abs(root - merged[-1]) > 1e-8:
            merged.append(root)

    peaks = tuple(
        Extremum(delta=root,
                 R_at=(r_val := reflection_at(config, params, root,
                                              FormulaVariant.EQUAL_GAMMA)),
                 verified=r_val >= 1.0 - SCAN_PEAK_TOL)
        for root in merged)

    spectrum = sweep(config, params, GridSpec(delta_min, delta_max, scan_points),
                     FormulaVariant.EQUAL_GAMMA)
    r_scan = spectrum.reflection
    scan_max = float(r_scan.max())

    def r_of(d: float) -> float:
        return reflection_at(config, params, d, FormulaVariant.EQUAL_GAMMA)

    dips: list[Extremum] = []
    for i in range(1, scan_points - 1):
        if not (r_scan[i] < r_scan[i - 1] and r_scan[i] < r_scan[i + 1]):
            continue
        if r_scan[i] >= 1e-6:
            continue
        x_ref, r_ref = _golden_minimize(r_of, float(xs[i - 1]), float(xs[i + 1]))
        if r_ref <= DIP_TOL:
            dips.append(Extremum(delta=x_ref, R_at=max(r_ref, 0.0), verified=True))

    return PeakReport(peaks=peaks, dips=tuple(dips), separation=None,
                      condition_met=condition_met, scan_max_R=scan_max)


# ---------------------------------------------------------------------------
# Scan-based extrema of an already computed spectrum
# ---------------------------------------------------------------------------


def numerical_extrema(spectrum: Spectrum) -> PeakReport:
    """Local maxima and minima of a sampled spectrum.

    Three-point comparison locates interior extrema; each one is
    refined by the vertex of the parabola through its three samples
    and the reflection is re-evaluated at the refined position.
    Minima are reported as dips only when they are actual reflection
    zeros (refined R <= 1e-8).
    """
    if len(spectrum) < 3:
        raise TooFewPoints(f"need at least 3 points, got {len(spectrum)}")

    xs = spectrum.deltas
    rs = spectrum.reflection
    try:
        variant = FormulaVariant(spectrum.metadata.variant)
    except ValueError:
        variant = None

    def refine(i: int) -> tuple[float, float]:
        h = 0.5 * (xs[i + 1] - xs[i - 1])
        curv = rs[i - 1] - 2.0 * rs[i] + rs[i + 1]
        if curv == 0.0:
            x_ref = float(xs[i])
        else:
            x_ref = float(xs[i] + 0.5 * h * (rs[i - 1] - rs[i + 1]) / curv)
            x_ref = min(max(x_ref, float(xs[i - 1])), float(xs[i + 1]))
        return x_ref, reflection_at(spectrum.config, spectrum.params, x_ref, variant)

    peaks: list[Extremum] = []
    dips: list[Extremum] = []
    for i in range(1, len(spectrum) - 1):
        if rs[i] > rs[i - 1] and rs[i] > rs[i + 1]:
            x_ref, r_ref = refine(i)
            peaks.append(Extremum(delta=x_ref, R_at=r_ref,
                                  verified=r_ref >= 1.0 - SCAN_PEAK_TOL))
        elif rs[i] < rs[i - 1] and rs[i] < rs[i + 1]:
            x_ref, r_ref = refine(i)
            if r_ref <= DIP_TOL:
                dips.append(Extremum(delta=x_ref, R_at=max(r_ref, 0.0), verified=True))

    separation = None
    if len(peaks) == 2:
        separation = abs(peaks[1].delta - peaks[0].delta)

    return PeakReport(peaks=tuple(peaks), dips=tuple(dips), separation=separation,
                      condition_met=bool(peaks), scan_max_R=float(rs.max()))
