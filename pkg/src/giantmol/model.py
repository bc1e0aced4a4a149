"""Core domain types and unit conventions.

Everything in this package is expressed in units of a reference decay
rate ``Gamma_ref`` (the decay rate of atom a) with the group velocity
set to one, so times are measured in ``1/Gamma_ref`` and the coupling
point spacing is ``x0 = tau * v_g``.  Detunings ``delta = E - Omega``
are measured from the shared atomic transition frequency.

The phase a photon picks up between two adjacent coupling points is

    theta = tau * delta + theta0

and the Markovian limit keeps only the constant part ``theta0``.  Phase
offsets are accepted in multiples of pi so that inputs such as 0.45 pi
or 101 pi stay exact: the integer part is reduced modulo 2 before the
multiplication by pi ever happens.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GiantmolError",
    "InvalidParams",
    "Topology",
    "Configuration",
    "PhaseModel",
    "SystemParams",
    "ScatterPoint",
    "GridSpec",
    "SweepInfo",
    "Spectrum",
    "phase_shift",
    "effective_detuning",
]


class GiantmolError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParams(GiantmolError, ValueError):
    """A domain object was constructed with out-of-range fields."""


class Topology(enum.Enum):
    """The three ways the two atoms' coupling points interleave."""

    SEPARATED = "separated"
    BRAIDED = "braided"
    NESTED = "nested"


# Coupling-point indices (m, n, l) in units of x0 for each topology.
# Atom a sits at points {0, m}, atom b at points {n, l}; together the
# four points are always {0, 1, 2, 3}.
_POINT_TABLE = {
    Topology.SEPARATED: (1, 2, 3),
    Topology.BRAIDED: (2, 1, 3),
    Topology.NESTED: (3, 1, 2),
}


@dataclass(frozen=True)
class Configuration:
    """A coupling topology together with its point indices.

    The indices are fixed by the topology; the constructor only accepts
    the canonical triple so that an inconsistent object cannot exist.
    Use the classmethods or :meth:`from_name` instead of spelling the
    indices out.
    """

    kind: Topology
    m: int
    n: int
    l: int

    def __post_init__(self) -> None:
        expected = _POINT_TABLE[self.kind]
        if (self.m, self.n, self.l) != expected:
            raise InvalidParams(
                f"{self.kind.value} coupling requires (m, n, l) = {expected}, "
                f"got {(self.m, self.n, self.l)}"
            )

    @classmethod
    def separated(cls) -> "Configuration":
        return cls(Topology.SEPARATED, *_POINT_TABLE[Topology.SEPARATED])

    @classmethod
    def braided(cls) -> "Configuration":
        return cls(Topology.BRAIDED, *_POINT_TABLE[Topology.BRAIDED])

    @classmethod
    def nested(cls) -> "Configuration":
        return cls(Topology.NESTED, *_POINT_TABLE[Topology.NESTED])

    @classmethod
    def from_name(cls, name: str) -> "Configuration":
        try:
            kind = Topology(name.strip().lower())
        except ValueError:
            valid = ", ".join(t.value for t in Topology)
            raise InvalidParams(f"unknown configuration {name!r}; expected one of {valid}")
        return cls(kind, *_POINT_TABLE[kind])

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def owners(self) -> tuple[str, str, str, str]:
        """Owner atom ('a' or 'b') of each coupling point j = 0..3."""
        table = ["", "", "", ""]
        for j in (0, self.m):
            table[j] = "a"
        for j in (self.n, self.l):
            table[j] = "b"
        return tuple(table)


@dataclass(frozen=True)
class PhaseModel:
    """Propagation phase between adjacent coupling points.

    ``theta0_over_pi`` is the constant phase offset in multiples of pi,
    ``tau`` the photon travel time between neighbouring points in units
    of 1/Gamma_ref.  With ``markovian`` set, the detuning-dependent part
    ``tau * delta`` is dropped and theta is identically theta0.
    """

    theta0_over_pi: float
    tau: float = 0.0
    markovian: bool = True

    def __post_init__(self) -> None:
        if not math.isfinite(self.theta0_over_pi) or self.theta0_over_pi < 0.0:
            raise InvalidParams(f"theta0_over_pi must be finite and >= 0, got {self.theta0_over_pi}")
        if not math.isfinite(self.tau) or self.tau < 0.0:
            raise InvalidParams(f"tau must be finite and >= 0, got {self.tau}")

    @classmethod
    def constant(cls, theta0_over_pi: float) -> "PhaseModel":
        """Markovian phase model, theta independent of detuning."""
        return cls(theta0_over_pi=theta0_over_pi, tau=0.0, markovian=True)

    @classmethod
    def retarded(cls, theta0_over_pi: float, tau: float) -> "PhaseModel":
        """Non-Markovian phase model with propagation delay tau."""
        return cls(theta0_over_pi=theta0_over_pi, tau=tau, markovian=False)

    @property
    def theta0(self) -> float:
        """Constant phase offset in radians, reduced exactly mod 2 pi.

        The integer part of theta0_over_pi is reduced modulo 2 before
        multiplying by pi, so 101 pi and 1 pi give bit-identical values
        and huge offsets lose no precision to the reduction.
        """
        k = math.floor(self.theta0_over_pi)
        frac = self.theta0_over_pi - k
        return ((k % 2) + frac) * math.pi


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the two-atom scatterer.

    gamma1 and gamma2 are the individual-atom decay rates into the
    waveguide (lambda**2 and eta**2 with v_g = 1), g the direct
    inter-atom coupling and kappa the intrinsic loss rate entering via
    delta -> delta + i kappa.  All in units of Gamma_ref.
    """

    gamma1: float = 1.0
    gamma2: float = 1.0
    g: float = 0.0
    kappa: float = 0.0
    phase: PhaseModel = field(default_factory=lambda: PhaseModel.constant(0.0))

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma1) and self.gamma1 > 0.0):
            raise InvalidParams(f"gamma1 must be finite and > 0, got {self.gamma1}")
        if not (math.isfinite(self.gamma2) and self.gamma2 > 0.0):
            raise InvalidParams(f"gamma2 must be finite and > 0, got {self.gamma2}")
        if not (math.isfinite(self.g) and self.g >= 0.0):
            raise InvalidParams(f"g must be finite and >= 0, got {self.g}")
        if not (math.isfinite(self.kappa) and self.kappa >= 0.0):
            raise InvalidParams(f"kappa must be finite and >= 0, got {self.kappa}")

    @property
    def equal_gamma(self) -> bool:
        return self.gamma1 == self.gamma2


def phase_shift(params: SystemParams, delta: float):
    """Phase theta accumulated between adjacent coupling points.

    Returns theta0 in the Markovian model and tau * delta + theta0
    otherwise.  Accepts scalar or ndarray delta.
    """
    phase = params.phase
    if phase.markovian:
        if isinstance(delta, np.ndarray):
            return np.full_like(delta, phase.theta0, dtype=float)
        return phase.theta0
    return phase.tau * delta + phase.theta0


def effective_detuning(params: SystemParams, delta: float):
    """Detuning with the loss substitution delta -> delta + i kappa."""
    return delta + 1j * params.kappa


@dataclass(frozen=True)
class ScatterPoint:
    """One sampled scattering point: amplitudes and coefficients."""

    delta: float
    t: complex
    r: complex
    T: float
    R: float

    @classmethod
    def from_amplitudes(cls, delta: float, t: complex, r: complex) -> "ScatterPoint":
        return cls(delta=float(delta), t=complex(t), r=complex(r),
                   T=abs(t) ** 2, R=abs(r) ** 2)


@dataclass(frozen=True)
class GridSpec:
    """Uniform detuning grid: steps points from delta_min to delta_max."""

    delta_min: float
    delta_max: float
    steps: int

    def deltas(self) -> np.ndarray:
        return np.linspace(self.delta_min, self.delta_max, self.steps)


@dataclass(frozen=True)
class SweepInfo:
    """Provenance attached to a swept spectrum.

    ``notes`` records every grid point that could not be evaluated by
    the literal closed form (near-degenerate denominator) together with
    the fallback that was used instead.
    """

    grid: GridSpec
    variant: str
    backend: str
    threads: int = 1
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Spectrum:
    """An ordered sweep of scattering points under fixed parameters."""

    config: Configuration
    params: SystemParams
    points: tuple[ScatterPoint, ...]
    metadata: SweepInfo

    def __post_init__(self) -> None:
        deltas = [p.delta for p in self.points]
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise InvalidParams("spectrum points must be strictly increasing in delta")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def deltas(self) -> np.ndarray:
        return np.array([p.delta for p in self.points])

    @property
    def transmission(self) -> np.ndarray:
        return np.array([p.T for p in self.points])

    @property
    def reflection(self) -> np.ndarray:
        return np.array([p.R for p in self.points])
