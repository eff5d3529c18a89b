"""Cavity quantities built from two mirrors: loop functions and Airy function.

On the imaginary axis the open loop is ``rho = r1 r2 exp(-2 kappa L)`` and
the closed loop ``f = rho / (1 - rho)``; the force integrand is
``phi = kappa f``.  :func:`mode_density` folds the transverse mode sum into
one function of ``xi`` which every force representation is built on.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import CODATA
from .errors import DomainError, ValidityError
from .materials import (MirrorSpec, Polarization, prepare_reflection,
                        reflection_imaginary, reflection_real, _sqrt_re_pos)
from .quad import NumericResult, Tolerance, integrate_half_line

C_LIGHT = CODATA.c_light
BOTH = (Polarization.TE, Polarization.TM)


@dataclass(frozen=True)
class CavityConfig:
    mirror1: MirrorSpec
    mirror2: MirrorSpec
    separation_L: float

    def __post_init__(self):
        if not self.separation_L > 0:
            raise ValidityError(f"separation must be positive, got {self.separation_L}")

    def with_separation(self, L: float) -> "CavityConfig":
        return CavityConfig(self.mirror1, self.mirror2, L)


@dataclass(frozen=True)
class TransverseMode:
    p: Polarization
    k: float

    def __post_init__(self):
        if not self.k >= 0:
            raise ValidityError(f"k must be non-negative, got {self.k}")


def kappa_imaginary(k, xi, c: float = C_LIGHT):
    """Vacuum decay constant on the imaginary axis, ``sqrt(k^2 + xi^2/c^2)``."""
    return np.hypot(np.asarray(k, dtype=float), np.asarray(xi, dtype=float) / c)[()]


def kz_real(k, omega, c: float = C_LIGHT):
    """Longitudinal wavevector at real ``omega`` (or just above the axis).

    Real and positive for propagating waves (``omega > c k``), positive
    imaginary for evanescent ones.
    """
    k = np.asarray(k, dtype=float)
    omega = np.asarray(omega)
    return (1j * _sqrt_re_pos(k * k - (omega / c) ** 2))[()]


def _check_mode(k, xi):
    k, xi = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(xi, dtype=float))
    if np.any((k == 0) & (xi == 0)):
        raise DomainError("(k, xi) = (0, 0) is excluded")
    return k, xi


def open_loop(cavity: CavityConfig, mode: TransverseMode, xi, c: float = C_LIGHT):
    """Round-trip amplitude ``rho = r1 r2 exp(-2 kappa L)`` at ``omega = i xi``."""
    k, xi = _check_mode(mode.k, xi)
    r1 = reflection_imaginary(cavity.mirror1, mode.p, k, xi, c)
    r2 = reflection_imaginary(cavity.mirror2, mode.p, k, xi, c)
    kappa = np.hypot(k, xi / c)
    return (r1 * r2 * np.exp(-2.0 * kappa * cavity.separation_L))[()]


def closed_loop(cavity: CavityConfig, mode: TransverseMode, xi, c: float = C_LIGHT):
    """Resummed round trips ``f = rho / (1 - rho)``."""
    rho = np.asarray(open_loop(cavity, mode, xi, c))
    return (rho / (1.0 - rho))[()]


def phi(cavity: CavityConfig, mode: TransverseMode, xi, c: float = C_LIGHT):
    """Force integrand ``kappa f`` on the imaginary axis (units of 1/m)."""
    k, xi = _check_mode(mode.k, xi)
    f = np.asarray(closed_loop(cavity, TransverseMode(mode.p, mode.k), xi, c))
    return (np.hypot(k, xi / c) * f)[()]


def open_loop_real(cavity: CavityConfig, mode: TransverseMode, omega, c: float = C_LIGHT):
    """Round-trip amplitude ``r1 r2 exp(2 i kz L)`` at real ``omega``."""
    r1 = reflection_real(cavity.mirror1, mode.p, mode.k, omega, c)
    r2 = reflection_real(cavity.mirror2, mode.p, mode.k, omega, c)
    kz = kz_real(mode.k, omega, c)
    return (r1 * r2 * np.exp(2j * kz * cavity.separation_L))[()]


def airy(cavity: CavityConfig, mode: TransverseMode, omega, c: float = C_LIGHT):
    """Airy function ``(1 - |rho|^2) / |1 - rho|^2`` at real ``omega``.

    Equal to ``1 + 2 Re f``; both mirrors need a real-axis model.
    """
    rho = np.asarray(open_loop_real(cavity, mode, omega, c))
    return airy_from_loop(rho)


def airy_from_loop(rho):
    rho = np.asarray(rho)
    return ((1.0 - np.abs(rho) ** 2) / np.abs(1.0 - rho) ** 2)[()]


def mode_density(cavity: CavityConfig, xi, tol: Tolerance = Tolerance(rel=1e-11),
                 polarizations: Sequence[Polarization] = BOTH,
                 c: float = C_LIGHT) -> NumericResult:
    r"""Transverse mode sum of the force integrand at imaginary frequencies.

    Returns, for every entry of ``xi``,

    .. math:: D(\xi) = \sum_p \frac{1}{2\pi}\int_0^\infty k\,\phi_p(k, \xi)\,dk

    The integral runs over ``t = kappa - xi/c`` (so ``k dk = kappa dt``), in
    which the round-trip factor decays as ``exp(-2 t L)`` for every ``xi``;
    all frequencies therefore share one adaptive partition.  ``xi = 0`` rows
    use the static reflection limits.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(xi < 0):
        raise DomainError("xi must be non-negative")
    L = cavity.separation_L
    a = (xi / c)[:, None]
    xi_col = xi[:, None]
    damping = np.exp(-2.0 * a * L)
    amp1 = prepare_reflection(cavity.mirror1, xi_col, c)
    amp2 = prepare_reflection(cavity.mirror2, xi_col, c)

    def integrand(t):
        kappa = a + t
        k2 = t * (t + 2.0 * a)
        decay = damping * np.exp(-2.0 * t * L)
        total = 0.0
        for p in polarizations:
            r1 = amp1(p, k2, kappa)
            r2 = amp2(p, k2, kappa)
            rho = r1 * r2 * decay
            total = total + kappa * kappa * rho / (1.0 - rho)
        return total / (2.0 * np.pi)

    res = integrate_half_line(integrand, tol, scale=1.0 / (2.0 * L))
    return res
