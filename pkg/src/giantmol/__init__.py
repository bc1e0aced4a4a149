"""Single-photon scattering for two coupled giant atoms on a 1D waveguide.

The package computes transmission and reflection amplitudes for a probe
photon scattering off a pair of interacting two-level emitters, each
coupled to the waveguide at two points.  Three coupling-point layouts
are supported (separated, braided, nested), with optional propagation
delay between the points and optional intrinsic loss.

Two independent computation routes are provided: closed-form rational
expressions (:mod:`giantmol.closedform`) and a dense linear solve of
the stationary scattering ansatz (:mod:`giantmol.realspace`).  The
:mod:`giantmol.analysis` module locates peaks, dips, and asymmetric
line shapes, and :mod:`giantmol.cli` exposes everything on the
command line.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .model import (
    Configuration,
    GiantmolError,
    GridSpec,
    InvalidParams,
    PhaseModel,
    ScatterPoint,
    Spectrum,
    SystemParams,
    Topology,
    effective_detuning,
    phase_shift,
)
from .closedform import (
    BadGrid,
    FormulaVariant,
    IncompatibleVariant,
    amplitudes,
    default_variant,
    scatter_point,
    sweep,
)
from .realspace import CouplingLayout, InternalAmplitudes, SingularSystem, solve_amplitudes

__all__ = [
    "BadGrid",
    "Configuration",
    "CouplingLayout",
    "FormulaVariant",
    "GiantmolError",
    "GridSpec",
    "IncompatibleVariant",
    "InternalAmplitudes",
    "InvalidParams",
    "PhaseModel",
    "ScatterPoint",
    "SingularSystem",
    "Spectrum",
    "SystemParams",
    "Topology",
    "__version__",
    "amplitudes",
    "default_variant",
    "effective_detuning",
    "phase_shift",
    "scatter_point",
    "solve_amplitudes",
    "sweep",
]
