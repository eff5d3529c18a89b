"""Built-in analytic battery behind ``casimir check``.

Each check compares an engine result with a closed form and also verifies
that a result flagged converged lies within three times its tolerance.
"""
from __future__ import annotations

import math

import numpy as np

from .cavity import CavityConfig
from .constants import CODATA
from .forces import (ThermalState, pressure_matsubara, pressure_perfect_closed_form,
                     pressure_zero_temperature, te_m0_term)
from .materials import Bulk, Drude, Perfect
from .quad import (Tolerance, cosine_transform, integrate_half_line, primed_sum,
                   radial_mode_integral)

ZETA3 = 1.2020569031595942853997


def _quad_check(name, result, exact, tol: Tolerance):
    err = abs(result.value - exact)
    bound = 3.0 * max(tol.rel * abs(exact), tol.abs)
    ok = result.converged and err <= bound
    return name, ok, f"value={result.value:.15g} exact={exact:.15g} |diff|={err:.2e} bound={bound:.2e}"


def run_battery() -> list[tuple[str, bool, str]]:
    tol = Tolerance(rel=1e-10)
    L = 1.0
    out = [
        _quad_check("half_line exp(-t)", integrate_half_line(lambda t: np.exp(-t), tol), 1.0, tol),
        _quad_check("half_line 1/(1+t^2)", integrate_half_line(lambda t: 1 / (1 + t * t), tol),
                    math.pi / 2, tol),
        _quad_check("half_line Bose t^2", integrate_half_line(
            lambda t: t * t * np.exp(-2 * t * L) / -np.expm1(-2 * t * L), tol, scale=1 / (2 * L)),
            ZETA3 / (4 * L ** 3), tol),
        _quad_check("cosine exp(-xi) at x=0", cosine_transform(lambda x: np.exp(-x), 0.0, tol), 2.0, tol),
        _quad_check("cosine exp(-xi) at x=1", cosine_transform(lambda x: np.exp(-x), 1.0, tol), 1.0, tol),
        _quad_check("cosine gaussian at x=2", cosine_transform(lambda x: np.exp(-x * x / 2), 2.0, tol),
                    math.sqrt(2 * math.pi) * math.exp(-2.0), tol),
        _quad_check("primed delta", primed_sum(lambda n: 1.0 if n == 0 else 0.0, tol), 0.5, tol),
        _quad_check("primed geometric", primed_sum(lambda n: 0.5 ** n, tol), 1.5, tol),
        _quad_check("primed 1/(n+1)^2", primed_sum(lambda n: 1.0 / (n + 1) ** 2, tol,
                                                   accelerate="richardson"),
                    0.5 + math.pi ** 2 / 6 - 1, tol),
        _quad_check("radial exp(-2kL)", radial_mode_integral(lambda k: np.exp(-2 * k * L), tol),
                    1 / (8 * math.pi * L * L), tol),
    ]

    P = Perfect()
    for Lm in (1e-7, 1e-6, 1e-5):
        rep = pressure_zero_temperature(CavityConfig(P, P, Lm), Tolerance(rel=1e-9))
        exact = pressure_perfect_closed_form(Lm)
        rel = abs(rep.pressure / exact - 1)
        out.append((f"ideal mirrors L={Lm:g} m", rep.result.converged and rel <= 1e-6,
                    f"P={rep.pressure:.12g} Pa closed form={exact:.12g} Pa rel={rel:.1e}"))

    Lm, T = 1e-6, 1e4
    state = ThermalState(T)
    classical = ZETA3 * CODATA.k_B * T / (4 * math.pi * Lm ** 3)
    gold = Bulk(Drude(1.37e16, 5.32e13))
    for name, mirror, factor in (("perfect", P, 1.0), ("drude", gold, 0.5)):
        rep = pressure_matsubara(CavityConfig(mirror, mirror, Lm), state, Tolerance(rel=1e-8))
        rel = abs(rep.pressure / (factor * classical) - 1)
        out.append((f"high-T limit {name}", rel <= 0.01,
                    f"P/classical={rep.pressure / classical:.6f} expected {factor}"))
    te = te_m0_term(CavityConfig(gold, gold, Lm), state)
    out.append(("Drude TE m=0 term", te == 0.0, f"te_m0={te!r}"))
    return out
