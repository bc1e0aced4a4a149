"""End-to-end acceptance gate.

Each test prints exactly one line

    criterion N: PASS - detail
    criterion N: FAIL - detail

on the real stdout (bypassing capture) before asserting, so a full run
always shows the per-criterion scoreboard with the measured numbers.
"""

import math

import numpy as np
import pytest

from giantmol import analysis, closedform, model, realspace


@pytest.fixture
def report(capfd):
    """Print one scoreboard line on the uncaptured stdout, then assert."""

    def _report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        with capfd.disabled():
            print(line, flush=True)
        assert ok, line

    return _report


def _params(theta0_pi, g, gamma1=1.0, gamma2=None, tau=0.0):
    gamma2 = gamma1 if gamma2 is None else gamma2
    phase = (model.PhaseModel.constant(theta0_pi) if tau == 0.0
             else model.PhaseModel.retarded(theta0_pi, tau))
    return model.SystemParams(gamma1=gamma1, gamma2=gamma2, g=g, kappa=0.0,
                              phase=phase)


SEP = model.Configuration.from_name("separated")
BRA = model.Configuration.from_name("braided")
NES = model.Configuration.from_name("nested")
ALL = (SEP, BRA, NES)


def test_criterion_1_unitarity(report):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(10_000):
        params = _params(theta0_pi=float(rng.uniform(0.0, 2.0)),
                         g=float(rng.uniform(0.0, 5.0)),
                         gamma2=float(rng.uniform(0.2, 5.0)),
                         tau=float(rng.choice([0.0, 0.1, 1.0, 2.0])))
        delta = float(rng.uniform(-10.0, 10.0))
        for config in ALL:
            point, _, _ = closedform.scatter_point(config, params, delta)
            worst = max(worst, abs(point.T + point.R - 1.0))
    report(1, worst <= 1e-10,
            f"max |T+R-1| = {worst:.3e} over 10000 draws x 3 configs (tol 1e-10)")


def test_criterion_2_oracle_equivalence(report):
    rng = np.random.default_rng(22)
    worst = 0.0
    compared = 0
    for config in ALL:
        for _ in range(1000):
            params = _params(theta0_pi=float(rng.uniform(0.0, 2.0)),
                             g=float(rng.uniform(0.0, 5.0)),
                             gamma2=float(rng.uniform(0.2, 5.0)),
                             tau=float(rng.choice([0.0, 2.0])))
            delta = float(rng.uniform(-10.0, 10.0))
            num_t, num_r, den = closedform.raw_terms(
                config, params, delta, closedform.FormulaVariant.GENERAL_GAMMA)
            if abs(den) < closedform.DEN_GUARD:
                continue
            try:
                t_o, r_o = realspace.amplitudes(config, params, delta)
            except realspace.SingularSystem:
                continue
            scale = max(1.0, abs(t_o), abs(r_o))
            worst = max(worst,
                        abs(num_t / den - t_o) / scale,
                        abs(num_r / den - r_o) / scale)
            compared += 1
    report(2, worst <= 1e-9 and compared >= 2900,
            f"max relative amplitude error = {worst:.3e} over "
            f"{compared} draws (tol 1e-9)")


def _fwhm(deltas, refl, center):
    idx = np.flatnonzero(np.abs(deltas - center) < 1.0)
    peak = int(idx[np.argmax(refl[idx])])
    half = refl[peak] / 2.0
    i = peak
    while i > 0 and refl[i] > half:
        i -= 1
    left = deltas[i] + (deltas[i + 1] - deltas[i]) * (half - refl[i]) \
        / (refl[i + 1] - refl[i])
    j = peak
    while j < len(deltas) - 1 and refl[j] > half:
        j += 1
    right = deltas[j - 1] + (deltas[j] - deltas[j - 1]) * (half - refl[j - 1]) \
        / (refl[j] - refl[j - 1])
    return float(deltas[peak]), float(right - left)


def test_criterion_3_lorentzian_limits(report):
    grid = model.GridSpec(-20.0, 20.0, 4001)
    cases = [(0.0, 2.0, 16.0), (0.5, 0.0, 8.0), (1.5, -4.0, 8.0)]
    ok = True
    parts = []
    for theta0_pi, center_want, width_want in cases:
        spectrum = closedform.sweep(SEP, _params(theta0_pi, 2.0), grid)
        center, width = _fwhm(spectrum.deltas, spectrum.reflection, center_want)
        good = (abs(center - center_want) <= 0.01 * max(1.0, abs(center_want))
                and abs(width - width_want) <= 0.01 * width_want)
        ok = ok and good
        parts.append(f"theta0={theta0_pi}pi: center {center:.4f} "
                     f"(want {center_want}), FWHM {width:.4f} (want {width_want})")
    report(3, ok, "; ".join(parts) + " (each within 1%)")


def test_criterion_4_fifty_fifty_splitter(report):
    spectrum = closedform.sweep(SEP, _params(1.75, 2.0),
                                model.GridSpec(-10.0, 10.0, 4001))
    peak = float(np.max(spectrum.reflection))
    report(4, abs(peak - 0.5) <= 0.01,
            f"max R = {peak:.6f} (want 0.50 +- 0.01)")


def test_criterion_5_braided_decoupling_and_splitting(report):
    grid = model.GridSpec(-10.0, 10.0, 2001)
    worst_bic = max(float(np.max(closedform.sweep(BRA, _params(0.5, g), grid).reflection))
                    for g in (0.5, 3.0))

    twin = analysis.markovian_peaks(BRA, _params(0.45, 3.0))
    sep_ok = (twin.separation is not None
              and all(p.verified for p in twin.peaks)
              and abs(twin.separation - 10.0) <= 0.05 * 10.0)

    lone_ok = True
    scan = model.GridSpec(-5.0, 5.0, 4001)
    for g in (1.98, 2.0, 2.1, 2.16):
        humps = [p for p in
                 analysis.numerical_extrema(
                     closedform.sweep(BRA, _params(1.45, g), scan)).peaks
                 if p.R_at >= 0.01]
        cond = analysis.markovian_peaks(BRA, _params(1.45, g)).condition_met
        lone_ok = lone_ok and len(humps) == 1 and not cond

    ok = worst_bic <= 1e-12 and sep_ok and lone_ok
    report(5, ok,
            f"decoupling max R = {worst_bic:.2e} (tol 1e-12); "
            f"separation {twin.separation:.6f} vs 2(g+2) = 10 "
            f"({abs(twin.separation - 10.0) / 10.0:.2%}, tol 5%); "
            f"single maximum across g in (1.975, 2.169): {lone_ok}")


def test_criterion_6_nested_dip_invariance(report):
    worst = 0.0
    for theta0_pi in (1.0 / 3.0, 5.0 / 3.0):
        for g in (1.0, 3.0, 5.0):
            worst = max(worst, closedform.reflection_at(
                NES, _params(theta0_pi, g), 0.0))
    report(6, worst <= 1e-8,
            f"max R(0) = {worst:.3e} over 6 cases (tol 1e-8)")


def test_criterion_7_fano_identity_and_regime(report):
    grid = model.GridSpec(-10.0, 10.0, 1001)
    residual = 0.0
    for config, theta0_pi, g_big in ((SEP, 0.03, 2.0), (BRA, 1.05, 3.0)):
        for g in (0.05, g_big):
            residual = max(residual, analysis.fano_decomposition_residual(
                config, _params(theta0_pi, g), grid))

    ratios = []
    approx_err = 0.0
    for config, theta0_pi in ((SEP, 0.03), (BRA, 1.05)):
        params = _params(theta0_pi, 0.05)
        comps = analysis.fano_components(config, params)
        ratios.append(comps.width_ratio)
        _, gam_n, center = analysis.narrow_resonance(config, params)
        deltas = np.linspace(center - 5.0 * gam_n, center + 5.0 * gam_n, 801)
        approx = analysis.fano_lineshape(config, params, deltas)
        exact = np.array([closedform.reflection_at(config, params, float(d))
                          for d in deltas])
        approx_err = max(approx_err, float(np.max(np.abs(exact - approx))))

    ok = residual <= 1e-10 and min(ratios) > 15.0 and approx_err <= 0.05
    report(7, ok,
            f"decomposition residual {residual:.2e} (tol 1e-10); width ratios "
            f"{ratios[0]:.1f}/{ratios[1]:.1f} (need > 15); max |R - fano| "
            f"{approx_err:.4f} within 5 narrow widths (tol 0.05)")


def test_criterion_8_delay_revival(report):
    cases = ((SEP, 101.0), (NES, 101.0), (BRA, 100.5))

    quasi = {}
    for config, theta0_pi in cases:
        rep = analysis.nonmarkovian_extrema(config, _params(theta0_pi, 3.0, tau=0.001),
                                            -10.0, 10.0)
        quasi[config.kind.value] = (sum(p.verified for p in rep.peaks),
                                    rep.scan_max_R)
    quiet_ok = all(n == 0 and mx < 1e-3 for n, mx in quasi.values())

    revived = {}
    for config, theta0_pi in cases:
        rep = analysis.nonmarkovian_extrema(config, _params(theta0_pi, 3.0, tau=1.0),
                                            -10.0, 10.0)
        revived[config.kind.value] = rep
    counts_ok = (sum(p.verified for p in revived["separated"].peaks) >= 3
                 and sum(p.verified for p in revived["nested"].peaks) >= 3)
    bra_peaks = sorted(p.delta for p in revived["braided"].peaks if p.verified)
    asym = max(abs(bra_peaks[i] + bra_peaks[len(bra_peaks) - 1 - i])
               for i in range(len(bra_peaks))) if bra_peaks else math.inf
    revival_ok = counts_ok and asym <= 1e-6

    quasi_txt = ", ".join(f"{k}: {n} verified, max R {mx:.3e}"
                          for k, (n, mx) in quasi.items())
    report(8, quiet_ok and revival_ok,
            f"tau=0.001 (want 0 verified and max R < 1e-3): {quasi_txt}; "
            f"tau=1: separated "
            f"{sum(p.verified for p in revived['separated'].peaks)} and nested "
            f"{sum(p.verified for p in revived['nested'].peaks)} verified "
            f"(need >= 3), braided set asymmetry {asym:.2e} (tol 1e-6)")


def test_criterion_9_symmetries(report):
    grid = model.GridSpec(-10.0, 10.0, 101)

    worst_bra = 0.0
    for x in np.linspace(0.0, 1.0, 101):
        a = closedform.sweep(BRA, _params(float(x), 3.0), grid).reflection
        b = closedform.sweep(BRA, _params(float(1.0 - x), 3.0), grid).reflection
        worst_bra = max(worst_bra, float(np.max(np.abs(a - b[::-1]))))

    worst_sep = 0.0
    for x in np.linspace(0.0, 2.0, 101):
        a = closedform.sweep(SEP, _params(float(x), 0.0), grid).reflection
        b = closedform.sweep(SEP, _params(float(2.0 - x), 0.0), grid).reflection
        worst_sep = max(worst_sep, float(np.max(np.abs(a - b[::-1]))))

    worst_delay = 0.0
    for config in ALL:
        for theta0_pi in (0.0, 1.0, 2.0):
            refl = closedform.sweep(config, _params(theta0_pi, 0.0, tau=2.0),
                                    grid).reflection
            worst_delay = max(worst_delay, float(np.max(np.abs(refl - refl[::-1]))))

    ok = worst_bra <= 1e-12 and worst_sep <= 1e-10 and worst_delay <= 1e-10
    report(9, ok,
            f"braided mirror {worst_bra:.2e} (tol 1e-12); separated g=0 mirror "
            f"{worst_sep:.2e} (tol 1e-10); delayed g=0 integer-pi symmetry "
            f"{worst_delay:.2e} (tol 1e-10)")
