"""Evaluation kernels for the six closed-form amplitude term sets.

Each kernel returns the raw triple (num_t, num_r, den) of one formula
set, so that t = num_t / den and r = num_r / den.  The terms are kept
separate because callers need |den| to detect near-degenerate points
before dividing.

The same six functions serve two backends:

* ``numba``  - the functions are compiled with ``numba.njit`` and a
  compiled driver loop evaluates whole grids with the GIL released.
* ``numpy``  - the identical function objects are applied to ndarrays
  directly; every operation inside them is a ufunc.

The backend is chosen once at import time from the environment variable
``GIANTMOL_BACKEND`` (``numba``, ``numpy`` or ``auto``; default auto,
which prefers numba when it is importable).  Keeping a single source of
truth for the formulas means the two backends cannot drift apart.
"""

from __future__ import annotations

import os

import numpy as np

from .model import GiantmolError

__all__ = [
    "BACKEND",
    "SEP_GENERAL",
    "SEP_EQUAL",
    "BRA_GENERAL",
    "BRA_EQUAL",
    "NES_GENERAL",
    "NES_EQUAL",
    "evaluate_terms",
    "evaluate_terms_scalar",
]

# Integer codes for the six formula sets (three configurations, each
# with a general-rate and an equal-rate variant).
SEP_GENERAL = 0
SEP_EQUAL = 1
BRA_GENERAL = 2
BRA_EQUAL = 3
NES_GENERAL = 4
NES_EQUAL = 5


def _select_backend() -> str:
    requested = os.environ.get("GIANTMOL_BACKEND", "auto").strip().lower() or "auto"
    if requested not in ("auto", "numba", "numpy"):
        raise GiantmolError(
            f"GIANTMOL_BACKEND must be 'numba', 'numpy' or 'auto', got {requested!r}"
        )
    if requested == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if requested == "numba":
            raise GiantmolError("GIANTMOL_BACKEND=numba but numba cannot be imported")
        return "numpy"
    return "numba"


BACKEND = _select_backend()


# ---------------------------------------------------------------------------
# The six term sets.  Signature is uniform: (de, th, g1, g2, g) with de the
# (possibly complex) detuning, th the inter-point phase, g1/g2 the two decay
# rates and g the inter-atom coupling.  Equal-rate variants read the shared
# rate from g1 and ignore g2.  No algebraic simplification is applied; the
# independent real-space solver is what validates these transcriptions.
# ---------------------------------------------------------------------------


def _sep_general_terms(de, th, g1, g2, g):
    e1 = np.exp(1j * th)
    root = np.sqrt(g1 * g2)
    num_t = (-(de - 2 * g1 * np.sin(th)) * (de - 2 * g2 * np.sin(th))
             + g * g + 4 * g * root * np.sin(2 * th) * (1 + np.cos(th)))
    num_r = (4j * np.exp(3j * th) * np.cos(th / 2) ** 2
             * (de * ((g1 + g2) * np.cos(2 * th) + 1j * (g2 - g1) * np.sin(2 * th))
                + 4 * g1 * g2 * (np.sin(th) + np.sin(2 * th)) + 2 * g * root))
    den = ((1j * de - (g1 + g2) * (1 + e1)) ** 2
           - (g1 - g2) ** 2 * (1 + e1) ** 2
           - (1j * g + root * e1 * (1 + e1) ** 2) ** 2)
    return num_t, num_r, den


def _sep_equal_terms(de, th, g1, g2, g):
    gm = g1
    e1 = np.exp(1j * th)
    num_t = (-(de - 2 * gm * np.sin(th)) ** 2 + g * g
             + 4 * g * gm * np.sin(2 * th) * (1 + np.cos(th)))
    num_r = (4j * gm * np.exp(3j * th) * np.cos(th / 2) ** 2
             * (2 * de * np.cos(2 * th) + 4 * gm * (np.sin(th) + np.sin(2 * th)) + 2 * g))
    den = ((1j * de - 2 * gm * (1 + e1)) ** 2
           - (1j * g + gm * e1 * (1 + e1) ** 2) ** 2)
    return num_t, num_r, den


def _bra_general_terms(de, th, g1, g2, g):
    e2 = np.exp(2j * th)
    root = np.sqrt(g1 * g2)
    num_t = (-(de - (g1 + g2) * np.sin(2 * th)) ** 2
             + (g1 + g2) ** 2 * np.sin(2 * th) ** 2 + 4 * g1 * g2 * np.sin(th) ** 2
             + g * g + 2 * g * root * (3 * np.sin(th) + np.sin(3 * th)))
    num_r = (4j * np.exp(3j * th) * np.cos(th) ** 2
             * (de * (g1 * np.exp(-1j * th) + g2 * np.exp(1j * th))
                + 4 * g1 * g2 * np.sin(th) + 2 * g * root))
    den = ((1j * de - (g1 + g2) * (1 + e2)) ** 2
           - ((g1 + g2) ** 2 + g1 * g2 * e2) * (1 + e2) ** 2
           + 4 * g1 * g2 + g * g
           - 2j * g * root * (3 * np.exp(1j * th) + np.exp(3j * th)))
    return num_t, num_r, den


def _bra_equal_terms(de, th, g1, g2, g):
    gm = g1
    e2 = np.exp(2j * th)
    num_t = (-(de - 2 * gm * np.sin(2 * th)) ** 2
             + 4 * gm ** 2 * (np.sin(2 * th) ** 2 + np.sin(th) ** 2)
             + g * g + 2 * g * gm * (3 * np.sin(th) + np.sin(3 * th)))
    num_r = (8j * gm * np.exp(3j * th) * np.cos(th) ** 2
             * (de * np.cos(th) + 2 * gm * np.sin(th) + g))
    den = ((1j * de - 2 * gm * (1 + e2)) ** 2
           - (1j * g + gm * (3 * np.exp(1j * th) + np.exp(3j * th))) ** 2)
    return num_t, num_r, den


def _nes_general_terms(de, th, g1, g2, g):
    e1 = np.exp(1j * th)
    e3 = np.exp(3j * th)
    root = np.sqrt(g1 * g2)
    num_t = (-(de - 2 * g2 * np.sin(th)) * (de - 2 * g1 * np.sin(3 * th))
             + (g + 2 * root * (np.sin(th) + np.sin(2 * th))) ** 2)
    num_r = (4j * np.exp(3j * th) * np.cos(th / 2) ** 2
             * (de * ((3 * g1 + g2) - 4 * g1 * np.cos(th) + 2 * g1 * np.cos(2 * th))
                + 4 * g1 * g2 * (np.sin(2 * th) - np.sin(th))
                - 2 * g * root * (1 - 2 * np.cos(th))))
    den = ((1j * de - 2 * g2 * (1 + e1)) * (1j * de - 2 * g1 * (1 + e3))
           - (1j * g + 2 * root * e1 * (1 + e1)) ** 2)
    return num_t, num_r, den


def _nes_equal_terms(de, th, g1, g2, g):
    gm = g1
    e1 = np.exp(1j * th)
    e3 = np.exp(3j * th)
    num_t = (-(de - 2 * gm * np.sin(th)) * (de - 2 * gm * np.sin(3 * th))
             + (g + 2 * gm * (np.sin(th) + np.sin(2 * th))) ** 2)
    num_r = (8j * gm * np.exp(3j * th) * np.cos(th / 2) ** 2
             * (de * (2 - 2 * np.cos(th) + np.cos(2 * th))
                + 2 * gm * (np.sin(2 * th) - np.sin(th)) - g * (1 - 2 * np.cos(th))))
    den = ((1j * de - 2 * gm * (1 + e1)) * (1j * de - 2 * gm * (1 + e3))
           - (1j * g + 2 * gm * e1 * (1 + e1)) ** 2)
    return num_t, num_r, den


_RAW_TERMS = {
    SEP_GENERAL: _sep_general_terms,
    SEP_EQUAL: _sep_equal_terms,
    BRA_GENERAL: _bra_general_terms,
    BRA_EQUAL: _bra_equal_terms,
    NES_GENERAL: _nes_general_terms,
    NES_EQUAL: _nes_equal_terms,
}


def _evaluate_numpy(code, deltas_eff, thetas, g1, g2, g):
    """Vectorized evaluation through plain numpy ufuncs."""
    num_t, num_r, den = _RAW_TERMS[code](deltas_eff, thetas, g1, g2, g)
    return (np.asarray(num_t, dtype=np.complex128),
            np.asarray(num_r, dtype=np.complex128),
            np.asarray(den, dtype=np.complex128))


if BACKEND == "numba":
    from numba import njit

    _sep_general_jit = njit(cache=True)(_sep_general_terms)
    _sep_equal_jit = njit(cache=True)(_sep_equal_terms)
    _bra_general_jit = njit(cache=True)(_bra_general_terms)
    _bra_equal_jit = njit(cache=True)(_bra_equal_terms)
    _nes_general_jit = njit(cache=True)(_nes_general_terms)
    _nes_equal_jit = njit(cache=True)(_nes_equal_terms)

    @njit(cache=True, nogil=True)
    def _drive_numba(code, deltas_eff, thetas, g1, g2, g):
        n = deltas_eff.shape[0]
        num_t = np.empty(n, dtype=np.complex128)
        num_r = np.empty(n, dtype=np.complex128)
        den = np.empty(n, dtype=np.complex128)
        for i in range(n):
            de = deltas_eff[i]
            th = thetas[i]
            if code == SEP_GENERAL:
                a, b, c = _sep_general_jit(de, th, g1, g2, g)
            elif code == SEP_EQUAL:
                a, b, c = _sep_equal_jit(de, th, g1, g2, g)
            elif code == BRA_GENERAL:
                a, b, c = _bra_general_jit(de, th, g1, g2, g)
            elif code == BRA_EQUAL:
                a, b, c = _bra_equal_jit(de, th, g1, g2, g)
            elif code == NES_GENERAL:
                a, b, c = _nes_general_jit(de, th, g1, g2, g)
            else:
                a, b, c = _nes_equal_jit(de, th, g1, g2, g)
            num_t[i] = a
            num_r[i] = b
            den[i] = c
        return num_t, num_r, den

    _SCALAR_TERMS = {
        SEP_GENERAL: _sep_general_jit,
        SEP_EQUAL: _sep_equal_jit,
        BRA_GENERAL: _bra_general_jit,
        BRA_EQUAL: _bra_equal_jit,
        NES_GENERAL: _nes_general_jit,
        NES_EQUAL: _nes_equal_jit,
    }
else:
    _SCALAR_TERMS = _RAW_TERMS


def evaluate_terms(code, deltas_eff, thetas, g1, g2, g):
    """Evaluate one formula set over arrays of detunings and phases.

    Returns the three complex arrays (num_t, num_r, den) in grid order.
    """
    deltas_eff = np.ascontiguousarray(deltas_eff, dtype=np.complex128)
    thetas = np.ascontiguousarray(thetas, dtype=np.float64)
    if deltas_eff.shape != thetas.shape:
        raise GiantmolError("deltas and thetas must have matching shapes")
    if BACKEND == "numba":
        return _drive_numba(int(code), deltas_eff, thetas,
                            float(g1), float(g2), float(g))
    return _evaluate_numpy(int(code), deltas_eff, thetas,
                           float(g1), float(g2), float(g))


def evaluate_terms_scalar(code, de, th, g1, g2, g):
    """Evaluate one formula set at a single point; returns complex scalars."""
    num_t, num_r, den = _SCALAR_TERMS[int(code)](
        complex(de), float(th), float(g1), float(g2), float(g))
    return complex(num_t), complex(num_r), complex(den)
