"""Real-space scattering oracle: assemble and solve the 10x10 system.

This module rebuilds the scattering amplitudes from first principles by
writing down the piecewise plane-wave ansatz between the four coupling
points and imposing the jump and atomic-amplitude conditions at every
point.  It deliberately shares no algebra with :mod:`giantmol.closedform`
(only the domain types from :mod:`giantmol.model`), so agreement between
the two routes genuinely validates the closed-form transcriptions.

Unknown ordering in the linear system:

    x = (t1, t2, t3, t, r, r1, r2, r3, u_a, u_b)

with right-mover segment amplitudes t_seg = [1, t1, t2, t3, t] and
left-mover segment amplitudes r_seg = [r, r1, r2, r3, 0].  The incoming
boundary condition (unit amplitude from the left, nothing from the
right) fixes t_seg[0] = 1 and r_seg[4] = 0, which is why those two do
not appear among the unknowns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    Configuration,
    GiantmolError,
    SystemParams,
    effective_detuning,
    phase_shift,
)

__all__ = [
    "SingularSystem",
    "CouplingLayout",
    "InternalAmplitudes",
    "build_system",
    "solve_amplitudes",
    "amplitudes",
]

# Group velocity in the chosen units.
_VG = 1.0

# A pivot below this magnitude means the system is numerically rank
# deficient at this parameter point (a bound state in the continuum or
# a similar degeneracy); callers may retry with delta nudged by 1e-9.
_PIVOT_FLOOR = 1e-14

# Solutions must reproduce the right-hand side to this relative level.
_RESIDUAL_RTOL = 1e-10


class SingularSystem(GiantmolError):
    """The assembled system is degenerate at this parameter point."""


@dataclass(frozen=True)
class CouplingLayout:
    """Which atom owns each coupling point, and with what amplitude.

    ``owner[j]`` is 'a' or 'b' for the point at position j*x0, and the
    coupling amplitudes are lam = sqrt(gamma1 * v_g) for atom a and
    eta = sqrt(gamma2 * v_g) for atom b.
    """

    owner: tuple[str, str, str, str]
    lam: float
    eta: float

    @classmethod
    def from_config(cls, config: Configuration, params: SystemParams) -> "CouplingLayout":
        return cls(
            owner=config.owners,
            lam=float(np.sqrt(params.gamma1 * _VG)),
            eta=float(np.sqrt(params.gamma2 * _VG)),
        )

    def strength(self, atom: str) -> float:
        return self.lam if atom == "a" else self.eta


@dataclass(frozen=True)
class InternalAmplitudes:
    """Full field solution: segment amplitudes plus atomic excitations."""

    t_seg: tuple[complex, complex, complex, complex, complex]
    r_seg: tuple[complex, complex, complex, complex, complex]
    u_a: complex
    u_b: complex

    @property
    def t(self) -> complex:
        """Transmission amplitude (right-mover past the last point)."""
        return self.t_seg[4]

    @property
    def r(self) -> complex:
        """Reflection amplitude (left-mover before the first point)."""
        return self.r_seg[0]


# Column index of t_seg[k] / r_seg[k] among the unknowns; None marks the
# two amplitudes fixed by the boundary condition.
_T_COLS = (None, 0, 1, 2, 3)
_R_COLS = (4, 5, 6, 7, None)
_U_COL = {"a": 8, "b": 9}


def build_system(config: Configuration, params: SystemParams, delta: float):
    """Assemble the 10x10 complex system A x = b at one detuning.

    For each coupling point j in {0,1,2,3} owned by atom q with coupling
    amplitude k_q, the field obeys two jump conditions,

        i v_g (t_seg[j] - t_seg[j+1]) e^{i j theta} + k_q u_q = 0,
        i v_g (r_seg[j+1] - r_seg[j]) e^{-i j theta} + k_q u_q = 0,

    and each atom obeys one amplitude equation,

        delta_eff u_q = g u_other
            + (k_q / 2) sum_{j owned by q} [(t_seg[j] + t_seg[j+1]) e^{i j theta}
                                            + (r_seg[j] + r_seg[j+1]) e^{-i j theta}],

    where the 1/2 is the field average at the coupling point (the step
    function evaluated at zero) and delta_eff carries the loss term.
    """
    layout = CouplingLayout.from_config(config, params)
    theta = phase_shift(params, delta)
    de = effective_detuning(params, delta)

    a = np.zeros((10, 10), dtype=complex)
    b = np.zeros(10, dtype=complex)

    row = 0
    for j in range(4):
        atom = layout.owner[j]
        kq = layout.strength(atom)
        ucol = _U_COL[atom]
        ph = np.exp(1j * j * theta)
        phm = np.exp(-1j * j * theta)

        # Right-mover jump across point j.
        if _T_COLS[j] is None:
            b[row] -= 1j * _VG * ph  # constant t_seg[0] = 1
        else:
            a[row, _T_COLS[j]] += 1j * _VG * ph
        a[row, _T_COLS[j + 1]] -= 1j * _VG * ph
        a[row, ucol] += kq
        row += 1

        # Left-mover jump across point j; r_seg[4] = 0 contributes nothing.
        if _R_COLS[j + 1] is not None:
            a[row, _R_COLS[j + 1]] += 1j * _VG * phm
        a[row, _R_COLS[j]] -= 1j * _VG * phm
        a[row, ucol] += kq
        row += 1

    # Atomic amplitude rows.
    for atom, other in (("a", "b"), ("b", "a")):
        kq = layout.strength(atom)
        a[row, _U_COL[atom]] += de
        a[row, _U_COL[other]] -= params.g
        for j in range(4):
            if layout.owner[j] != atom:
                continue
            ph = np.exp(1j * j * theta)
            phm = np.exp(-1j * j * theta)
            for col, w in ((_T_COLS[j], ph), (_T_COLS[j + 1], ph),
                           (_R_COLS[j], phm), (_R_COLS[j + 1], phm)):
                if col is not None:
                    a[row, col] -= (kq / 2) * w
            if _T_COLS[j] is None:
                b[row] += (kq / 2) * ph  # field average picks up t_seg[0] = 1
        row += 1

    return a, b


def _solve_dense(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting on a small dense system."""
    a = a.copy()
    b = b.copy()
    n = a.shape[0]
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[piv, col]) < _PIVOT_FLOOR:
            raise SingularSystem(
                f"pivot magnitude {abs(a[piv, col]):.3e} below {_PIVOT_FLOOR:g} "
                f"at elimination step {col}"
            )
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            b[[col, piv]] = b[[piv, col]]
        factors = a[col + 1:, col] / a[col, col]
        a[col + 1:, col:] -= factors[:, None] * a[col, col:]
        b[col + 1:] -= factors * b[col]
    x = np.zeros(n, dtype=complex)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1:] @ x[row + 1:]) / a[row, row]
    return x


def solve_amplitudes(config: Configuration, params: SystemParams,
                     delta: float) -> InternalAmplitudes:
    """Solve the assembled system and return the full field solution.

    Raises SingularSystem when the system is degenerate at this point or
    the solution fails the residual check.
    """
    a, b = build_system(config, params, delta)
    x = _solve_dense(a, b)

    residual = float(np.max(np.abs(a @ x - b)))
    scale = float(np.max(np.abs(b)))
    if residual > _RESIDUAL_RTOL * scale:
        raise SingularSystem(
            f"solution residual {residual:.3e} exceeds {_RESIDUAL_RTOL:g} * {scale:.3e}"
        )

    return InternalAmplitudes(
        t_seg=(1.0 + 0.0j, complex(x[0]), complex(x[1]), complex(x[2]), complex(x[3])),
        r_seg=(complex(x[4]), complex(x[5]), complex(x[6]), complex(x[7]), 0.0 + 0.0j),
        u_a=complex(x[8]),
        u_b=complex(x[9]),
    )


def amplitudes(config: Configuration, params: SystemParams,
               delta: float) -> tuple[complex, complex]:
    """Transmission and reflection amplitudes from the real-space solve."""
    sol = solve_amplitudes(config, params, delta)
    return sol.t, sol.r
