"""Casimir pressure between two plane mirrors in several representations.

Every imaginary-axis evaluator is written in terms of the transverse mode
density ``D(xi)`` of :func:`casimir.cavity.mode_density`:

* zero temperature:  ``P = (hbar/pi) int_0^inf D(xi) dxi``
* Matsubara sum:     ``P = (hbar w_T/pi) sum'_m D(m w_T)``
* exponential series ``P = (hbar/pi) sum'_n Dt(2 pi n / w_T)`` with
  ``Dt(x) = 2 int_0^inf cos(x xi) D(xi) dxi``

with ``w_T = 2 pi k_B T / hbar``.  Pressures are per unit area and positive
for attraction.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cavity import BOTH, CavityConfig, mode_density
from .constants import CODATA, Constants
from .errors import DomainError, UnsupportedModelError
from .materials import (Bulk, Perfect, Polarization, PrescribedAmplitude,
                        Tabulated, _sqrt_re_pos, reflection_real)
from .quad import (NumericResult, Tolerance, cosine_transform, integrate,
                   integrate_half_line, primed_sum, DEFAULT_TOLERANCE)


class Evaluator(str, enum.Enum):
    MATSUBARA = "matsubara"
    EXP_SERIES = "exp_series"
    ZERO_TEMPERATURE = "zero_temperature"
    REAL_AXIS = "real_axis"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class ThermalState:
    temperature: float
    constants: Constants = CODATA

    def __post_init__(self):
        if not self.temperature >= 0:
            raise DomainError(f"temperature must be >= 0 K, got {self.temperature}")

    @property
    def omega_T(self) -> float:
        """Thermal frequency ``2 pi k_B T / hbar`` (rad/s)."""
        c = self.constants
        return 2.0 * math.pi * c.k_B * self.temperature / c.hbar


@dataclass(frozen=True)
class Diagnostics:
    te_m0_term: Optional[float] = None
    poisson_residual: Optional[float] = None
    poisson_residual_error: Optional[float] = None
    propagating: Optional[float] = None
    evanescent: Optional[float] = None


@dataclass(frozen=True)
class PressureReport:
    """Outcome of one evaluator run.

    ``breakdown`` lists ``(index, contribution)`` pairs whose plain sum is the
    pressure; the primed half weight of index 0 is already applied, so for
    the exponential series the ``n = 0`` entry is the zero-temperature
    pressure itself.
    """

    evaluator_id: Evaluator
    pressure: float
    result: NumericResult
    breakdown: tuple = ()
    diagnostics: Diagnostics = field(default_factory=Diagnostics)


class _Work:
    """Accumulates inner-integral bookkeeping across batched calls."""

    def __init__(self):
        self.evaluations = 0
        self.converged = True
        self.rel_error = 0.0

    def mode_density(self, cavity, xi, tol, polarizations=BOTH, c=CODATA.c_light):
        r = mode_density(cavity, xi, tol, polarizations, c)
        self.evaluations += r.evaluations
        self.converged &= r.converged
        value = np.asarray(r.value)
        scale = np.abs(value).max() if value.size else 0.0
        if scale > 0:
            self.rel_error = max(self.rel_error, float(np.max(r.error_estimate)) / scale)
        return value


def _inner(tol: Tolerance) -> Tolerance:
    return Tolerance(rel=min(1e-11, max(tol.rel * 1e-3, 1e-14)), abs=0.0,
                     max_evals=tol.max_evals)


def thermal_weight(omega, state: ThermalState):
    """Thermal factor ``coth(pi omega / w_T)``; identically 1 at ``T = 0``.

    ``omega`` may be complex (evaluations just above the real axis).
    """
    omega = np.asarray(omega)
    if state.temperature == 0:
        return np.ones_like(omega)[()]
    if np.any(omega == 0):
        raise DomainError("thermal weight is singular at omega = 0 for T > 0")
    return (1.0 / np.tanh(math.pi * omega / state.omega_T))[()]


def pressure_perfect_closed_form(L: float, constants: Constants = CODATA) -> float:
    """Ideal-mirror pressure ``hbar c pi^2 / (240 L^4)`` at zero temperature."""
    if not L > 0:
        raise DomainError(f"separation must be positive, got {L}")
    return constants.hbar * constants.c_light * math.pi ** 2 / (240.0 * L ** 4)


def pressure_zero_temperature(cavity: CavityConfig, tol: Tolerance = DEFAULT_TOLERANCE,
                              constants: Constants = CODATA) -> PressureReport:
    """Vacuum pressure, ``(hbar/pi) int_0^inf D(xi) dxi``."""
    hbar, c = constants.hbar, constants.c_light
    L = cavity.separation_L
    work = _Work()
    inner = _inner(tol)
    pref = hbar / math.pi

    def density(xi):
        return work.mode_density(cavity, xi, inner, c=c)

    outer = Tolerance(rel=tol.rel * 0.5, abs=tol.abs * 0.5 / pref, max_evals=tol.max_evals)
    res = integrate_half_line(density, outer, scale=c / (2.0 * L))
    pressure = pref * res.value
    error = pref * (res.error_estimate + work.rel_error * abs(res.value))
    ok = res.converged and work.converged and error <= float(tol.target(pressure))
    result = NumericResult(pressure, error, work.evaluations + res.evaluations, ok)
    return PressureReport(Evaluator.ZERO_TEMPERATURE, pressure, result)


# -- Matsubara sum -----------------------------------------------------------

_GREGORY = (1 / 2, -1 / 12, 1 / 24, -19 / 720, 3 / 160, -863 / 60480)
# below this w_T L / c the sum is closed with Gregory end corrections
GREGORY_THRESHOLD = 0.02
GREGORY_HEAD = 64


def _kappa_moment_tail(A: float, L: float) -> float:
    # int_A^inf kappa^2 exp(-2 kappa L) dkappa
    return math.exp(-2 * A * L) * (A * A / (2 * L) + A / (2 * L * L) + 1 / (4 * L ** 3))


def _matsubara_tail_bound(n_last: int, omega_T: float, L: float, c: float,
                          n_pol: int) -> float:
    """Bound on ``sum_{m > n_last} |D(m w_T)|`` from ``|rho| <= exp(-2 kappa L)``."""
    A = (n_last + 1) * omega_T / c
    if 2 * A * L > 700:
        return 0.0
    enhance = 1.0 / -math.expm1(-2 * A * L)
    first = _kappa_moment_tail(A, L)
    e = math.exp(-2 * A * L)
    # int_A^inf of the per-term bound over a, by parts
    integral = (_kappa_moment_tail(A, L) / (2 * L)
                + e * (A / (2 * L) + 1 / (4 * L * L)) / (2 * L * L)
                + e / (8 * L ** 4))
    return n_pol * enhance * (first + integral * c / omega_T) / (2 * math.pi)


def pressure_matsubara(cavity: CavityConfig, state: ThermalState,
                       tol: Tolerance = DEFAULT_TOLERANCE) -> PressureReport:
    """Lifshitz pressure, a primed sum over Matsubara frequencies ``m w_T``.

    The ``m = 0`` term uses the exact static reflection amplitudes.  The sum
    is truncated with an analytic tail bound; when ``w_T L / c`` is so small
    that thousands of terms would be needed, the terms beyond
    ``GREGORY_HEAD`` are replaced by their integral plus Gregory end
    corrections.
    """
    if state.temperature <= 0:
        raise DomainError("Matsubara sum needs T > 0; use pressure_zero_temperature")
    hbar, c = state.constants.hbar, state.constants.c_light
    L = cavity.separation_L
    wT = state.omega_T
    pref = hbar * wT / math.pi
    work = _Work()
    inner = _inner(tol)
    x = wT * L / c
    if x < GREGORY_THRESHOLD:
        return _matsubara_gregory(cavity, state, tol, work, inner)

    values: list[float] = []

    def terms(ms):
        d = work.mode_density(cavity, ms * wT, inner, c=c)
        values.extend(float(v) for v in d)
        return d

    n_guess = int(math.ceil(-math.log(max(tol.rel, 1e-16)) / (2 * x))) + 2
    chunk = int(min(max(n_guess, 4), 256))
    series_tol = Tolerance(rel=tol.rel * 0.5, abs=tol.abs * 0.5 / pref, max_evals=tol.max_evals)
    res = primed_sum(terms, series_tol, chunk=chunk, max_terms=20_000,
                     tail_bound=lambda n: _matsubara_tail_bound(n, wT, L, c, 2))
    n_used = res.evaluations
    weights = np.ones(n_used)
    weights[0] = 0.5
    contrib = pref * weights * np.asarray(values[:n_used])
    pressure = pref * res.value
    error = pref * (res.error_estimate + work.rel_error * abs(res.value))
    ok = res.converged and work.converged and error <= float(tol.target(pressure))
    result = NumericResult(pressure, error, work.evaluations, ok)
    breakdown = tuple((m, float(v)) for m, v in enumerate(contrib))
    return PressureReport(Evaluator.MATSUBARA, pressure, result, breakdown)


def _matsubara_gregory(cavity, state, tol, work, inner):
    hbar, c = state.constants.hbar, state.constants.c_light
    L = cavity.separation_L
    wT = state.omega_T
    pref = hbar * wT / math.pi
    head = GREGORY_HEAD
    ms = np.arange(head + len(_GREGORY))
    d = work.mode_density(cavity, ms * wT, inner, c=c)
    explicit = 0.5 * d[0] + d[1:head].sum()
    start = head * wT

    def shifted(s):
        return work.mode_density(cavity, start + s, inner, c=c)

    integ = integrate_half_line(shifted, Tolerance(rel=tol.rel * 0.1, abs=tol.abs * 0.1 / pref,
                                                   max_evals=tol.max_evals),
                                scale=c / (2.0 * L))
    diffs = [d[head]]
    cur = d[head:]
    for _ in range(len(_GREGORY) - 1):
        cur = np.diff(cur)
        diffs.append(cur[0])
    corrections = [w * dj for w, dj in zip(_GREGORY, diffs)]
    # last retained correction doubles as the truncation estimate
    tail = integ.value / wT + sum(corrections[:-1])
    total = explicit + tail
    pressure = pref * total
    error = pref * (integ.error_estimate / wT + abs(corrections[-1])
                    + work.rel_error * abs(total))
    ok = integ.converged and work.converged and error <= float(tol.target(pressure))
    result = NumericResult(pressure, error, work.evaluations + integ.evaluations, ok)
    contrib = [(0, pref * 0.5 * float(d[0]))]
    contrib += [(m, pref * float(d[m])) for m in range(1, head)]
    contrib.append((head, pref * float(tail)))
    return PressureReport(Evaluator.MATSUBARA, pressure, result, tuple(contrib))


def te_m0_term(cavity: CavityConfig, state: ThermalState,
               tol: Tolerance = DEFAULT_TOLERANCE) -> float:
    """Half-weighted TE contribution of the ``m = 0`` Matsubara term (Pa).

    Vanishes for Drude mirrors (static TE amplitude is zero) and not for
    plasma or perfect mirrors; this term is what separates the two models.
    """
    if state.temperature <= 0:
        raise DomainError("the m = 0 term needs T > 0")
    c = state.constants.c_light
    r = mode_density(cavity, np.zeros(1), _inner(tol), (Polarization.TE,), c)
    pref = state.constants.hbar * state.omega_T / math.pi
    return float(pref * 0.5 * r.value[0])


# -- exponential series --------------------------------------------------------

def pressure_exp_series(cavity: CavityConfig, state: ThermalState,
                        tol: Tolerance = DEFAULT_TOLERANCE) -> PressureReport:
    """Pressure as a primed sum of cosine transforms of ``D`` at ``2 pi n / w_T``.

    The ``n = 0`` term is the vacuum (zero-temperature) pressure; ``n >= 1``
    terms are thermal corrections.  They decay algebraically in ``n`` so the
    series is closed by Richardson extrapolation in ``1/N``.
    """
    if state.temperature <= 0:
        raise DomainError("exponential series needs T > 0; use pressure_zero_temperature")
    hbar, c = state.constants.hbar, state.constants.c_light
    L = cavity.separation_L
    wT = state.omega_T
    pref = hbar / math.pi
    work = _Work()
    inner = _inner(tol)
    scale = c / (2.0 * L)

    def density(xi):
        return work.mode_density(cavity, xi, inner, c=c)

    vacuum = cosine_transform(density, 0.0, Tolerance(rel=tol.rel * 0.1, abs=tol.abs * 0.1 / pref,
                                                      max_evals=tol.max_evals), scale)
    # thermal terms only need absolute accuracy relative to the vacuum term
    term_abs = max(0.02 * tol.rel * abs(vacuum.value), tol.abs * 0.02 / pref)
    term_tol = Tolerance(rel=max(tol.rel * 0.1, 1e-14), abs=term_abs, max_evals=tol.max_evals)
    values = [vacuum.value]
    quad_err = [vacuum.error_estimate]
    converged = [vacuum.converged]

    def term(n):
        if n == 0:
            return vacuum.value
        r = cosine_transform(density, 2.0 * math.pi * n / wT, term_tol, scale)
        values.append(r.value)
        quad_err.append(r.error_estimate)
        converged.append(r.converged)
        return r.value

    series_tol = Tolerance(rel=tol.rel * 0.5, abs=tol.abs * 0.5 / pref, max_evals=tol.max_evals)
    res = primed_sum(term, series_tol, accelerate="richardson", max_terms=512)
    pressure = pref * res.value
    error = pref * (res.error_estimate + sum(quad_err) + work.rel_error * abs(res.value))
    ok = res.converged and all(converged) and work.converged and error <= float(tol.target(pressure))
    result = NumericResult(pressure, error, work.evaluations, ok)
    breakdown = [(0, pref * 0.5 * values[0])]
    breakdown += [(n, pref * v) for n, v in enumerate(values[1:], start=1)]
    # an extrapolated series is not a plain sum of computed terms
    extrapolated = pressure - sum(v for _, v in breakdown)
    if extrapolated != 0.0:
        breakdown.append((len(values), extrapolated))
    return PressureReport(Evaluator.EXP_SERIES, pressure, result, tuple(breakdown))


def poisson_residual(cavity: CavityConfig, state: ThermalState,
                     tol: Tolerance = DEFAULT_TOLERANCE) -> NumericResult:
    """Exponential-series minus Matsubara pressure, with combined error.

    This is a measurement: for dissipative mirrors no value is presumed.
    """
    exp_rep = pressure_exp_series(cavity, state, tol)
    mats = pressure_matsubara(cavity, state, tol)
    return NumericResult(exp_rep.pressure - mats.pressure,
                         exp_rep.result.error_estimate + mats.result.error_estimate,
                         exp_rep.result.evaluations + mats.result.evaluations,
                         exp_rep.result.converged and mats.result.converged)


# -- real frequency axis -------------------------------------------------------

def _check_real_axis(mirror):
    if isinstance(mirror, Perfect):
        raise UnsupportedModelError("perfect mirrors are not transparent at high frequency; "
                                    "the real-axis integral does not apply")
    if isinstance(mirror, Bulk) and isinstance(mirror.dielectric, Tabulated):
        raise UnsupportedModelError("tabulated models have no real-axis continuation")


class _BudgetExhausted(Exception):
    pass


@dataclass(frozen=True)
class _RealAxisValue:
    propagating: float
    evanescent: float
    error: float
    evaluations: int
    converged: bool

    @property
    def total(self):
        return self.propagating + self.evanescent


def _real_axis_at(cavity: CavityConfig, state: ThermalState, eta: float,
                  tol: Tolerance) -> _RealAxisValue:
    hbar, c = state.constants.hbar, state.constants.c_light
    L = cavity.separation_L
    # the ideal-mirror pressure sets the absolute scale of every sub-integral
    # weighted by the round-trip reflectivity near omega = c/L
    strength = abs(complex(reflection_real(cavity.mirror1, Polarization.TM, 0.0, c / L, c)
                           * reflection_real(cavity.mirror2, Polarization.TM, 0.0, c / L, c)))
    spectral_scale = (pressure_perfect_closed_form(L, state.constants) * math.pi / hbar * L / c
                      * min(1.0, max(strength, 1e-6)))
    inner = Tolerance(rel=1e-14, abs=1e-4 * tol.rel * spectral_scale * 2.0 * math.pi,
                      max_evals=tol.max_evals)
    counter = [0, True]

    def loop_integrand(omega, k, kz_factor):
        big_omega = omega + 1j * eta
        kz = 1j * _sqrt_re_pos(k * k - (big_omega / c) ** 2)
        phase = np.exp(2j * kz * L)
        out = 0.0
        for p in BOTH:
            r1 = reflection_real(cavity.mirror1, p, k, big_omega, c)
            r2 = reflection_real(cavity.mirror2, p, k, big_omega, c)
            rho = r1 * r2 * phase
            out = out + kz * rho / (1.0 - rho)
        return out * kz_factor

    def sectors(omega):
        w = (omega / c)[:, None]
        om = omega[:, None]
        # the thermal factor stays on the real axis: shifted, its pole at
        # omega = 0 would leave a Lorentzian that removes the m = 0 term
        weight = thermal_weight(om, state) if state.temperature > 0 else 1.0

        def prop(u):
            # k = (omega/c) sqrt(1 - u^2), so k dk = -(omega/c)^2 u du
            k = w * np.sqrt(1.0 - u * u)
            return weight * np.real(loop_integrand(om, k, w * w * u))

        def evan(v):
            k = np.sqrt(w * w + v * v)
            return weight * np.real(loop_integrand(om, k, v))

        rp = integrate(prop, 0.0, 1.0, inner)
        re = integrate_half_line(evan, inner, scale=1.0 / (2.0 * L))
        counter[0] += rp.evaluations + re.evaluations
        counter[1] &= rp.converged and re.converged
        if counter[0] > tol.max_evals:
            raise _BudgetExhausted
        err = np.asarray(rp.error_estimate) + np.asarray(re.error_estimate)
        return np.stack([np.asarray(rp.value), np.asarray(re.value), err]) / (2.0 * math.pi)

    # one panel per period of exp(2 i omega L / c); the panel sums form a
    # slowly decaying series that is extrapolated in the panel count
    period = math.pi * c / L
    panel_tol = Tolerance(rel=0.1 * tol.rel, abs=1e-3 * tol.rel * spectral_scale * period,
                          max_evals=tol.max_evals)
    evan_terms: list[float] = []
    prop_terms: list[float] = []
    errs: list[float] = []

    def panel(j):
        r = integrate(sectors, j * period, (j + 1) * period, panel_tol)
        counter[0] += r.evaluations
        counter[1] &= r.converged
        evan_terms.append(float(r.value[1]))
        prop_terms.append(float(r.value[0]))
        errs.append(float(r.error_estimate[0] + r.error_estimate[1] + r.value[2]))
        return float(r.value[0] + r.value[1])

    series_tol = Tolerance(rel=tol.rel * 0.5, abs=tol.abs * 0.5 * math.pi / hbar,
                           max_evals=tol.max_evals)
    pref = -hbar / math.pi
    try:
        series = primed_sum(panel, series_tol, accelerate="richardson", first_weight=1.0,
                            max_terms=4096)
    except _BudgetExhausted:
        # report the panels finished so far, with no claim on accuracy
        total = pref * (sum(evan_terms) + sum(prop_terms))
        evan = pref * sum(evan_terms)
        return _RealAxisValue(total - evan, evan, math.inf, counter[0], False)
    total = pref * series.value
    evan = pref * sum(evan_terms)
    error = abs(pref) * (series.error_estimate + sum(errs))
    return _RealAxisValue(total - evan, evan, error, counter[0],
                          bool(counter[1]) and series.converged)


def default_eta(L: float, constants: Constants = CODATA) -> float:
    """Damping used when none is given: ``0.0025 c / L``."""
    return 0.0025 * constants.c_light / L


def pressure_real_axis(cavity: CavityConfig, state: ThermalState, eta: float,
                       tol: Tolerance = DEFAULT_TOLERANCE) -> PressureReport:
    """Diagnostic pressure from the real-frequency integral.

    The integrand is evaluated at ``omega + i eta``.  Shifting the line
    drops the strip ``0 < xi < eta`` of the imaginary-axis integral, so the
    damped value differs from the limit at first order in ``eta``; it is
    extrapolated to ``eta -> 0`` from the values at ``eta`` and ``2 eta``
    (linear Richardson) and a third value at ``4 eta`` feeds the error
    estimate.  ``eta`` of a few thousandths of ``c/L`` (see
    :func:`default_eta`) gives about 1e-4 relative accuracy.  Modes are split into propagating (``k < omega/c``) and
    evanescent (``k > omega/c``) sectors, both reported in the diagnostics.
    """
    _check_real_axis(cavity.mirror1)
    _check_real_axis(cavity.mirror2)
    if not eta > 0:
        raise DomainError(f"eta must be positive, got {eta}")
    # the extrapolant weighs the runs' errors by 2 + 1; the third run's by 1/3
    run_tol = tol.scaled(0.125)
    runs = [_real_axis_at(cavity, state, s * eta, run_tol) for s in (1, 2, 4)]

    def extrapolate(a, b):
        return 2.0 * a - b

    p0 = extrapolate(runs[0].total, runs[1].total)
    p1 = extrapolate(runs[1].total, runs[2].total)
    # the two-point extrapolant keeps an O(eta^2) error, a third of p1 - p0
    # for a pure quadratic; half leaves room for the next order
    extrap_err = abs(p1 - p0) / 2.0
    prop = extrapolate(runs[0].propagating, runs[1].propagating)
    evan = extrapolate(runs[0].evanescent, runs[1].evanescent)
    error = extrap_err + 2.0 * runs[0].error + runs[1].error
    evals = sum(r.evaluations for r in runs)
    ok = all(r.converged for r in runs) and error <= float(tol.target(p0))
    result = NumericResult(p0, error, evals, ok)
    diag = Diagnostics(propagating=prop, evanescent=evan)
    return PressureReport(Evaluator.REAL_AXIS, p0, result, (), diag)
