import math

import numpy as np
import pytest

from casimir.cavity import CavityConfig, mode_density
from casimir.constants import CODATA
from casimir.errors import DomainError, UnsupportedModelError
from casimir.forces import (Evaluator, ThermalState, default_eta, poisson_residual,
                            pressure_exp_series, pressure_matsubara, pressure_perfect_closed_form,
                            pressure_real_axis, pressure_zero_temperature, te_m0_term,
                            thermal_weight)
from casimir.materials import (Bulk, Drude, Perfect, Plasma, Polarization, PrescribedAmplitude,
                               Tabulated, Vacuum)
from casimir.quad import Tolerance, radial_mode_integral

from conftest import ZETA3

HBAR, C, KB = CODATA.hbar, CODATA.c_light, CODATA.k_B
WP, GD = 1.37e16, 5.32e13
P, PL, DR = Perfect(), Bulk(Plasma(WP)), Bulk(Drude(WP, GD))


def cav(m, L=1e-6, m2=None):
    return CavityConfig(m, m2 if m2 is not None else m, L)


def classical(L, T):
    return ZETA3 * KB * T / (4 * math.pi * L ** 3)


# -- closed form and thermal weight ---------------------------------------------------------

def test_closed_form_examples():
    assert pressure_perfect_closed_form(1e-6) == pytest.approx(1.3001e-3, rel=1e-4)
    assert pressure_perfect_closed_form(1e-7) == pytest.approx(1.3001e1, rel=1e-4)
    assert pressure_perfect_closed_form(1e-6) == pytest.approx(HBAR * C * math.pi ** 2 / 240e-24, rel=1e-15)
    assert pressure_perfect_closed_form(1e-6) / pressure_perfect_closed_form(2e-6) == pytest.approx(16, rel=1e-15)
    with pytest.raises(DomainError):
        pressure_perfect_closed_form(0.0)


def coth_series(x, terms=200_000):
    # partial fractions: 1/x + sum 2x/(x^2 + n^2 pi^2), tail ~ 2x/(pi^2 N)
    n = np.arange(1, terms + 1, dtype=float)
    return 1 / x + math.fsum(2 * x / (x * x + (n * math.pi) ** 2)) + 2 * x / (math.pi ** 2 * (terms + 0.5))


def test_thermal_weight():
    assert thermal_weight(1e14, ThermalState(0.0)) == 1.0
    s = ThermalState(300.0)
    w = s.omega_T / math.pi
    assert thermal_weight(w, s) == pytest.approx(coth_series(1.0), rel=1e-9)
    assert thermal_weight(w, s) == pytest.approx(1.3130353, rel=1e-7)
    big = np.linspace(15.01, 40, 50) * s.omega_T / math.pi
    assert np.all(np.abs(thermal_weight(big, s) - 1) < 1e-12)
    with pytest.raises(DomainError):
        thermal_weight(0.0, s)
    with pytest.raises(DomainError):
        ThermalState(-1.0)


def test_thermal_frequency():
    assert ThermalState(300.0).omega_T == pytest.approx(2 * math.pi * KB * 300 / HBAR, rel=1e-15)


# -- zero temperature ---------------------------------------------------------------------

@pytest.mark.parametrize("L", [1e-7, 1e-6, 1e-5])
def test_zero_temperature_perfect(L):
    rep = pressure_zero_temperature(cav(P, L), Tolerance(rel=1e-9))
    assert rep.evaluator_id is Evaluator.ZERO_TEMPERATURE
    assert rep.result.converged
    assert rep.pressure == pytest.approx(pressure_perfect_closed_form(L), rel=1e-9)
    assert rep.result.error_estimate <= 1e-9 * rep.pressure


def test_zero_temperature_power_law():
    a = pressure_zero_temperature(cav(P, 1e-6)).pressure
    b = pressure_zero_temperature(cav(P, 2e-6)).pressure
    assert b / a == pytest.approx(1 / 16, rel=1e-8)


@pytest.mark.parametrize("x", [1e3, 3e3, 1e4])
def test_zero_temperature_plasma_approaches_perfect(x):
    # large w_P L / c expansion in the penetration depth d = c / (w_P L)
    L = x * C / WP
    d = 1 / x
    series = 1 - 16 / 3 * d + 24 * d * d - 640 / 7 * (1 - math.pi ** 2 / 210) * d ** 3
    rep = pressure_zero_temperature(cav(PL, L), Tolerance(rel=1e-10))
    assert rep.result.converged
    ratio = rep.pressure / pressure_perfect_closed_form(L)
    # next term is O(d^4)
    assert ratio == pytest.approx(series, abs=500 * d ** 4)
    assert ratio < 1


def test_vacuum_mirror_gives_zero():
    for other in (P, PL, DR):
        assert pressure_zero_temperature(cav(Bulk(Vacuum()), m2=other)).pressure == 0.0
        rep = pressure_matsubara(cav(other, m2=Bulk(Vacuum())), ThermalState(300.0))
        assert rep.pressure == 0.0 and rep.result.converged


def test_tabulated_mirror_is_supported():
    w = np.geomspace(1e13, 1e17, 200)
    loss = 3e15 ** 2 * 1e14 * w / ((3e15 ** 2 - w ** 2) ** 2 + 1e28 * w ** 2)
    m = Bulk(Tabulated(w, loss, "osc"))
    rep = pressure_zero_temperature(cav(m), Tolerance(rel=1e-6))
    assert rep.result.converged
    assert 0 < rep.pressure < pressure_perfect_closed_form(1e-6)


# -- Matsubara ----------------------------------------------------------------------------

def test_matsubara_low_temperature_perfect():
    rep = pressure_matsubara(cav(P), ThermalState(1.0), Tolerance(rel=1e-9))
    assert rep.result.converged
    assert rep.pressure == pytest.approx(pressure_perfect_closed_form(1e-6), rel=1e-5)


@pytest.mark.parametrize("mirror,factor", [(P, 1.0), (DR, 0.5)], ids=["perfect", "drude"])
def test_matsubara_classical_limit(mirror, factor):
    L, T = 1e-6, 1e4
    state = ThermalState(T)
    assert state.omega_T * L / C >= 20
    rep = pressure_matsubara(cav(mirror, L), state, Tolerance(rel=1e-8))
    assert rep.result.converged
    assert rep.pressure / classical(L, T) == pytest.approx(factor, rel=1e-2)


def test_matsubara_needs_temperature():
    with pytest.raises(DomainError):
        pressure_matsubara(cav(P), ThermalState(0.0))


def test_matsubara_breakdown_sums_to_pressure():
    for m in (P, PL, DR):
        rep = pressure_matsubara(cav(m), ThermalState(300.0), Tolerance(rel=1e-8))
        idx = [i for i, _ in rep.breakdown]
        assert idx == sorted(idx)
        total = math.fsum(v for _, v in rep.breakdown)
        assert abs(total - rep.pressure) <= rep.result.error_estimate + 1e-14 * rep.pressure


# -- TE m = 0 ------------------------------------------------------------------------------

def test_te_m0_drude_is_zero():
    assert te_m0_term(cav(DR), ThermalState(300.0)) == 0.0


def test_te_m0_perfect_is_half_the_static_term():
    L, state = 1e-6, ThermalState(300.0)
    # TE and TM each contribute zeta(3)/(8 pi L^3) to D(0)
    expected = HBAR * state.omega_T / math.pi * 0.5 * ZETA3 / (8 * math.pi * L ** 3)
    assert te_m0_term(cav(P, L), state) == pytest.approx(expected, rel=1e-10)
    tm = mode_density(cav(P, L), [0.0], polarizations=(Polarization.TM,)).value[0]
    assert te_m0_term(cav(P, L), state) == pytest.approx(HBAR * state.omega_T / math.pi * 0.5 * tm, rel=1e-12)


def test_te_m0_plasma_between_zero_and_perfect():
    wp = 1e16
    L = 10 * C / wp
    state = ThermalState(300.0)
    val = te_m0_term(cav(Bulk(Plasma(wp)), L), state)
    ideal = te_m0_term(cav(P, L), state)
    assert 0 < val < ideal
    # oracle: radial quadrature of kappa f with the static plasma amplitude
    kp = wp / C

    def f(k):
        r = (k - np.hypot(k, kp)) / (k + np.hypot(k, kp))
        rho = r * r * np.exp(-2 * k * L)
        return k * rho / (1 - rho)

    direct = radial_mode_integral(f, Tolerance(rel=1e-12), scale=1 / (2 * L)).value
    assert val == pytest.approx(HBAR * state.omega_T / math.pi * 0.5 * direct, rel=1e-9)


# -- exponential series ---------------------------------------------------------------------

@pytest.mark.parametrize("mirror", [P, PL, DR, PrescribedAmplitude(0.5, C / 1e-6)],
                         ids=["perfect", "plasma", "drude", "prescribed"])
def test_exp_series_vacuum_term(mirror):
    tol = Tolerance(rel=1e-8)
    rep = pressure_exp_series(cav(mirror), ThermalState(300.0), tol)
    zero = pressure_zero_temperature(cav(mirror), tol)
    n0 = dict(rep.breakdown)[0]
    assert abs(n0 - zero.pressure) <= rep.result.error_estimate + zero.result.error_estimate


@pytest.mark.parametrize("mirror", [P, PL], ids=["perfect", "plasma"])
def test_exp_series_matches_matsubara(mirror):
    tol = Tolerance(rel=1e-8)
    state = ThermalState(300.0)
    a = pressure_exp_series(cav(mirror), state, tol)
    b = pressure_matsubara(cav(mirror), state, tol)
    assert a.result.converged and b.result.converged
    assert a.pressure == pytest.approx(b.pressure, rel=1e-6)


def test_exp_series_breakdown_consistency():
    rep = pressure_exp_series(cav(PL), ThermalState(300.0), Tolerance(rel=1e-8))
    assert math.fsum(v for _, v in rep.breakdown) == pytest.approx(rep.pressure, rel=1e-13)
    idx = [i for i, _ in rep.breakdown]
    assert idx == sorted(idx) and idx[0] == 0


def test_poisson_residual_smooth_models():
    state = ThermalState(300.0)
    for m in (P, PL):
        res = poisson_residual(cav(m), state, Tolerance(rel=1e-8))
        assert res.converged
        assert abs(res.value) <= max(res.error_estimate, 1e-8 * pressure_perfect_closed_form(1e-6))


def test_poisson_residual_drude_is_reported():
    # a measurement for dissipative mirrors; only well-formedness is asserted
    res = poisson_residual(cav(DR), ThermalState(300.0), Tolerance(rel=1e-6))
    assert math.isfinite(res.value) and res.error_estimate > 0
    assert isinstance(res.converged, bool)


# -- invariants ------------------------------------------------------------------------------

def test_pressure_positive_and_decreasing_in_L():
    Ls = np.geomspace(2e-7, 5e-6, 8)
    state = ThermalState(300.0)
    for m in (P, PL, DR):
        vals = [pressure_matsubara(cav(m, L), state, Tolerance(rel=1e-7)).pressure for L in Ls]
        assert all(v > 0 for v in vals)
        assert all(b < a for a, b in zip(vals, vals[1:]))
        zero = [pressure_zero_temperature(cav(m, L), Tolerance(rel=1e-7)).pressure for L in Ls]
        assert all(b < a for a, b in zip(zero, zero[1:]))


@pytest.mark.parametrize("L,T,s", [(1e-6, 300.0, 2.0), (3e-7, 1000.0, 2.0), (2e-6, 50.0, 2.0),
                                   (1e-6, 300.0, 3.7), (4e-7, 2500.0, 1.3)])
def test_thermal_scaling_perfect(L, T, s):
    tol = Tolerance(rel=1e-9)
    a = pressure_matsubara(cav(P, L), ThermalState(T), tol).pressure / pressure_perfect_closed_form(L)
    b = pressure_matsubara(cav(P, s * L), ThermalState(T / s), tol).pressure / pressure_perfect_closed_form(s * L)
    assert a == pytest.approx(b, rel=1e-6)


def test_drude_plasma_discontinuity():
    L, state, tol = 5e-6, ThermalState(300.0), Tolerance(rel=1e-9)
    plasma = pressure_matsubara(cav(PL, L), state, tol).pressure
    drude = pressure_matsubara(cav(Bulk(Drude(WP, 1e-6 * WP)), L), state, tol).pressure
    te = te_m0_term(cav(PL, L), state, tol)
    assert abs(plasma - drude - te) <= 0.01 * te


# -- real axis --------------------------------------------------------------------------------

def test_real_axis_rejects_unsupported_mirrors():
    with pytest.raises(UnsupportedModelError):
        pressure_real_axis(cav(P), ThermalState(0.0), 1e12)
    w = np.geomspace(1e13, 1e17, 10)
    with pytest.raises(UnsupportedModelError):
        pressure_real_axis(cav(Bulk(Tabulated(w, np.ones(10)))), ThermalState(0.0), 1e12)
    with pytest.raises(DomainError):
        pressure_real_axis(cav(PrescribedAmplitude(0.5, 3e14)), ThermalState(0.0), 0.0)


def test_real_axis_agrees_with_imaginary_axis():
    L = 1e-6
    c = cav(PrescribedAmplitude(0.5, C / L), L)
    tol = Tolerance(rel=3e-4)
    rep = pressure_real_axis(c, ThermalState(0.0), default_eta(L), tol)
    ref = pressure_zero_temperature(c, Tolerance(rel=1e-9)).pressure
    assert rep.evaluator_id is Evaluator.REAL_AXIS
    assert abs(rep.pressure / ref - 1) <= 1e-3
    assert abs(rep.pressure - ref) <= rep.result.error_estimate
    d = rep.diagnostics
    # the two sectors add up to the total; neither alone is the total
    assert d.propagating + d.evanescent == pytest.approx(rep.pressure, rel=1e-12)
    assert abs(d.evanescent - rep.pressure) > 10 * rep.result.error_estimate


def test_real_axis_empty_cavity_limit():
    L = 1e-6
    tol = Tolerance(rel=1e-3)
    vals = []
    for r0 in (1e-2, 1e-4):
        c = cav(PrescribedAmplitude(r0, C / L), L)
        vals.append(pressure_real_axis(c, ThermalState(0.0), default_eta(L), tol).pressure)
    ref = pressure_zero_temperature(cav(PrescribedAmplitude(1.0, C / L), L)).pressure
    # rho scales as r0^2
    assert abs(vals[0]) < 1e-3 * ref and abs(vals[1]) < 1e-7 * ref
    assert vals[1] / vals[0] == pytest.approx(1e-4, rel=1e-2)


def test_real_axis_finite_temperature():
    L = 1e-6
    c = cav(PrescribedAmplitude(0.5, C / L), L)
    state = ThermalState(3000.0)
    rep = pressure_real_axis(c, state, default_eta(L), Tolerance(rel=1e-3))
    ref = pressure_matsubara(c, state, Tolerance(rel=1e-8)).pressure
    assert abs(rep.pressure / ref - 1) <= 3e-3


def test_real_axis_budget_is_reported():
    L = 1e-6
    c = cav(PrescribedAmplitude(0.5, C / L), L)
    rep = pressure_real_axis(c, ThermalState(0.0), default_eta(L), Tolerance(rel=1e-4, max_evals=200))
    assert not rep.result.converged
