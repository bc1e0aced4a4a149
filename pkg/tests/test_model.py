"""Parameter containers, validation, and the exact phase reduction."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from giantmol.model import (
    Configuration,
    GridSpec,
    InvalidParams,
    PhaseModel,
    ScatterPoint,
    Spectrum,
    SweepInfo,
    SystemParams,
    Topology,
    effective_detuning,
    phase_shift,
)


def test_canonical_point_orders():
    assert (Configuration.separated().m, Configuration.separated().n,
            Configuration.separated().l) == (1, 2, 3)
    assert (Configuration.braided().m, Configuration.braided().n,
            Configuration.braided().l) == (2, 1, 3)
    assert (Configuration.nested().m, Configuration.nested().n,
            Configuration.nested().l) == (3, 1, 2)


def test_owner_patterns():
    assert Configuration.separated().owners == ("a", "a", "b", "b")
    assert Configuration.braided().owners == ("a", "b", "a", "b")
    assert Configuration.nested().owners == ("a", "b", "b", "a")


def test_non_canonical_triple_rejected():
    with pytest.raises(InvalidParams):
        Configuration(kind=Topology.SEPARATED, m=2, n=1, l=3)


def test_from_name():
    assert Configuration.from_name("nested").kind is Topology.NESTED
    assert Configuration.from_name("braided").name == "braided"
    with pytest.raises(InvalidParams, match="separated"):
        Configuration.from_name("ring")


def test_phase_model_validation():
    with pytest.raises(InvalidParams):
        PhaseModel(theta0_over_pi=-0.1, tau=0.0, markovian=True)
    with pytest.raises(InvalidParams):
        PhaseModel(theta0_over_pi=0.5, tau=-1.0, markovian=False)
    with pytest.raises(InvalidParams):
        PhaseModel(theta0_over_pi=math.nan, tau=0.0, markovian=True)


def test_theta0_reduces_integer_part_exactly():
    assert PhaseModel.constant(101.0).theta0 == math.pi
    assert PhaseModel.constant(100.5).theta0 == 0.5 * math.pi
    assert PhaseModel.constant(2.0).theta0 == 0.0
    assert PhaseModel.constant(0.0).theta0 == 0.0
    assert PhaseModel.constant(1.45).theta0 == (1 + 0.45) * math.pi


@given(st.integers(min_value=0, max_value=2 ** 15),
       st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_theta0_reduction_is_exact_for_representable_inputs(k, num):
    # k + frac holds exactly in a double for these ranges, so the
    # reduction must agree bitwise with the hand-reduced form and be
    # exactly two-periodic.
    frac = num / 2.0 ** 32
    x = k + frac
    assert PhaseModel.constant(x).theta0 == ((k % 2) + frac) * math.pi
    assert PhaseModel.constant(x + 2.0).theta0 == PhaseModel.constant(x).theta0
    assert 0.0 <= PhaseModel.constant(x).theta0 < 2.0 * math.pi


def test_system_params_validation():
    with pytest.raises(InvalidParams):
        SystemParams(gamma1=0.0)
    with pytest.raises(InvalidParams):
        SystemParams(gamma2=-1.0)
    with pytest.raises(InvalidParams):
        SystemParams(g=-0.5)
    with pytest.raises(InvalidParams):
        SystemParams(kappa=-1e-9)
    with pytest.raises(InvalidParams):
        SystemParams(gamma1=math.inf)


def test_equal_gamma_flag():
    assert SystemParams(gamma1=1.0, gamma2=1.0).equal_gamma
    assert not SystemParams(gamma1=1.0, gamma2=1.5).equal_gamma


def test_phase_shift_constant():
    params = SystemParams(phase=PhaseModel.constant(0.25))
    assert phase_shift(params, 7.3) == 0.25 * math.pi
    arr = phase_shift(params, np.array([1.0, 2.0, 3.0]))
    assert arr.shape == (3,)
    assert np.all(arr == 0.25 * math.pi)


def test_phase_shift_with_delay():
    params = SystemParams(phase=PhaseModel.retarded(0.5, 2.0))
    assert phase_shift(params, 1.25) == pytest.approx(2.0 * 1.25 + 0.5 * math.pi)
    arr = phase_shift(params, np.array([-1.0, 0.0, 1.0]))
    assert arr == pytest.approx(2.0 * np.array([-1.0, 0.0, 1.0]) + 0.5 * math.pi)


def test_effective_detuning_adds_loss():
    params = SystemParams(kappa=0.3)
    assert effective_detuning(params, 1.5) == 1.5 + 0.3j


def test_scatter_point_coefficients():
    point = ScatterPoint.from_amplitudes(0.7, 0.6 + 0.0j, 0.0 + 0.8j)
    assert point.T == pytest.approx(0.36)
    assert point.R == pytest.approx(0.64)
    assert point.delta == 0.7


def test_grid_spec_deltas():
    grid = GridSpec(-2.0, 2.0, 5)
    assert np.array_equal(grid.deltas(), np.linspace(-2.0, 2.0, 5))


def _tiny_spectrum(deltas):
    config = Configuration.separated()
    params = SystemParams()
    points = tuple(ScatterPoint.from_amplitudes(d, 1.0 + 0j, 0j) for d in deltas)
    info = SweepInfo(grid=GridSpec(float(deltas[0]), float(deltas[-1]), len(deltas)),
                     variant="equal", backend="numpy")
    return Spectrum(config=config, params=params, points=points, metadata=info)


def test_spectrum_requires_increasing_deltas():
    with pytest.raises(InvalidParams):
        _tiny_spectrum([0.0, 1.0, 1.0])
    spec = _tiny_spectrum([0.0, 0.5, 1.0])
    assert len(spec) == 3
    assert np.array_equal(spec.deltas, [0.0, 0.5, 1.0])
    assert np.array_equal(spec.transmission, [1.0, 1.0, 1.0])
    assert np.array_equal(spec.reflection, [0.0, 0.0, 0.0])
