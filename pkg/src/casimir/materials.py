"""Dielectric functions and single-mirror reflection amplitudes.

Two frequency axes are supported.  On the imaginary axis ``omega = i xi``
all supported amplitudes are real and the Fresnel laws are evaluated in a
cancellation-free form; on the real axis (or slightly above it) amplitudes
are complex and only models with an analytic continuation are accepted.

Sign convention: both Fresnel amplitudes are non-positive on the imaginary
axis, ``r_TE = (kappa - K)/(kappa + K)`` and ``r_TM = (K - eps kappa)/(K +
eps kappa)``; a perfect mirror has ``r = -1`` for both polarizations.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from typing import TextIO, Union

import numpy as np

from .constants import CODATA
from .errors import (DomainError, FormatError, InsufficientDataError,
                     UnsupportedModelError, ValidityError)
from .quad import Tolerance, integrate_half_line

C_LIGHT = CODATA.c_light


class Polarization(enum.Enum):
    TE = "TE"
    TM = "TM"


# -- dielectric models -------------------------------------------------------

@dataclass(frozen=True)
class Vacuum:
    pass


@dataclass(frozen=True)
class Plasma:
    """Lossless plasma model, ``eps = 1 - omega_p**2 / omega**2``."""

    omega_p: float

    def __post_init__(self):
        if not self.omega_p > 0:
            raise ValidityError(f"omega_p must be positive, got {self.omega_p}")


@dataclass(frozen=True)
class Drude:
    """Drude model, ``eps = 1 - omega_p**2 / (omega (omega + i gamma_d))``.

    Zero damping is the plasma model and must be written as :class:`Plasma`.
    """

    omega_p: float
    gamma_d: float

    def __post_init__(self):
        if not self.omega_p > 0:
            raise ValidityError(f"omega_p must be positive, got {self.omega_p}")
        if not self.gamma_d > 0:
            raise ValidityError(
                f"gamma_d must be positive (use Plasma for zero damping), got {self.gamma_d}")


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Material known through samples of ``Im eps`` on the real axis.

    Between samples ``Im eps`` is interpolated linearly in ``log omega``;
    outside the tabulated range it is taken to vanish.
    """

    omega: np.ndarray
    eps_imag: np.ndarray
    name: str = ""
    # KK integral accuracy; interpolation error is usually larger
    tolerance: Tolerance = field(default=Tolerance(rel=1e-10), repr=False)

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float)
        eps_imag = np.array(self.eps_imag, dtype=float)
        if omega.ndim != 1 or omega.shape != eps_imag.shape:
            raise FormatError("omega and eps_imag must be 1-D arrays of equal length")
        if omega.size < 4:
            raise InsufficientDataError(f"need at least 4 samples, got {omega.size}")
        if not np.all(np.isfinite(omega)) or not np.all(np.isfinite(eps_imag)):
            raise ValidityError("samples must be finite")
        if np.any(omega <= 0):
            raise ValidityError("tabulated frequencies must be positive")
        if np.any(eps_imag < 0):
            raise ValidityError("Im eps must be non-negative (passive medium)")
        if np.any(np.diff(omega) <= 0):
            raise FormatError("tabulated frequencies must be strictly increasing")
        omega.flags.writeable = False
        eps_imag.flags.writeable = False
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "eps_imag", eps_imag)
        object.__setattr__(self, "_log_omega", np.log(omega))

    def loss(self, omega):
        """Interpolated ``Im eps`` at real frequencies ``omega``."""
        omega = np.asarray(omega, dtype=float)
        out = np.zeros_like(omega)
        inside = (omega >= self.omega[0]) & (omega <= self.omega[-1])
        out[inside] = np.interp(np.log(omega[inside]), self._log_omega, self.eps_imag)
        return out


DielectricModel = Union[Vacuum, Plasma, Drude, Tabulated]


# -- mirrors -----------------------------------------------------------------

@dataclass(frozen=True)
class Perfect:
    pass


@dataclass(frozen=True)
class Bulk:
    dielectric: DielectricModel


@dataclass(frozen=True)
class PrescribedAmplitude:
    """Causal test mirror, ``r(omega) = -r0 / (1 - i omega/omega_c)**2``.

    The amplitude is the same for both polarizations and every transverse
    wavevector; it is transparent at high frequency.
    """

    r0: float
    omega_c: float

    def __post_init__(self):
        if not 0 < self.r0 <= 1:
            raise ValidityError(f"r0 must lie in (0, 1], got {self.r0}")
        if not self.omega_c > 0:
            raise ValidityError(f"omega_c must be positive, got {self.omega_c}")


MirrorSpec = Union[Perfect, Bulk, PrescribedAmplitude]


# -- imaginary axis ----------------------------------------------------------

def _kk_excess(model: Tabulated, xi: np.ndarray) -> np.ndarray:
    """``eps(i xi) - 1`` from the dispersion relation, for an array of ``xi``."""
    flat = np.ravel(xi)
    uniq, inverse = np.unique(flat, return_inverse=True)
    scale = math.sqrt(model.omega[0] * model.omega[-1])

    def integrand(w):
        loss = model.loss(w)
        return (2 / math.pi) * w * loss / (w * w + uniq[:, None] ** 2)

    res = integrate_half_line(integrand, model.tolerance, scale=scale,
                              breaks=tuple(model.omega))
    return np.asarray(res.value)[inverse].reshape(np.shape(xi))


def _check_xi(model, xi):
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise DomainError("xi must be non-negative")
    if isinstance(model, (Plasma, Drude)) and np.any(xi == 0):
        raise DomainError("eps(i xi) is singular at xi = 0 for plasma/Drude models; "
                          "use reflection_imaginary for the static limit")
    return xi


def epsilon_imaginary(model: DielectricModel, xi):
    """Dielectric function on the imaginary axis, ``eps(i xi) >= 1``."""
    xi = _check_xi(model, xi)
    if isinstance(model, Vacuum):
        return np.ones_like(xi)[()]
    if isinstance(model, Plasma):
        return (1.0 + model.omega_p ** 2 / xi ** 2)[()]
    if isinstance(model, Drude):
        return (1.0 + model.omega_p ** 2 / (xi * (xi + model.gamma_d)))[()]
    if isinstance(model, Tabulated):
        return (1.0 + _kk_excess(model, xi))[()]
    raise UnsupportedModelError(f"unknown dielectric model {model!r}")


def _response(model, xi):
    """``((eps - 1) xi**2, 1/eps)`` at ``eps(i xi)``, both finite at ``xi = 0``.

    For conductors ``1/eps`` vanishes at ``xi = 0`` while ``(eps - 1) xi**2``
    tends to ``omega_p**2`` (plasma) or to zero (Drude).
    """
    if isinstance(model, Vacuum):
        return np.zeros_like(xi), np.ones_like(xi)
    if isinstance(model, Plasma):
        wp2 = model.omega_p ** 2
        return np.full_like(xi, wp2), xi ** 2 / (xi ** 2 + wp2)
    if isinstance(model, Drude):
        wp2 = model.omega_p ** 2
        d = xi * (xi + model.gamma_d)
        return wp2 * xi / (xi + model.gamma_d), d / (d + wp2)
    if isinstance(model, Tabulated):
        chi = _kk_excess(model, xi)
        return chi * xi ** 2, 1.0 / (1.0 + chi)
    raise UnsupportedModelError(f"unknown dielectric model {model!r}")


def medium_wavevector_imaginary(model: DielectricModel, k, xi, c: float = C_LIGHT):
    """Longitudinal decay constant in the medium, ``K = sqrt(k^2 + eps xi^2/c^2)``."""
    k = np.asarray(k, dtype=float)
    eps = np.asarray(epsilon_imaginary(model, xi))
    xi = np.asarray(xi, dtype=float)
    return np.sqrt(k * k + eps * (xi / c) ** 2)[()]


def _fresnel(p, k2, kappa, excess, inv):
    """Fresnel amplitude from the vacuum decay constant ``kappa``.

    ``excess`` is ``(eps - 1) xi^2 / c^2`` and ``inv`` is ``1/eps``.  The
    formulas are rearranged so that no difference of nearly equal roots is
    taken and ``eps`` never appears unbounded.
    """
    big_k = np.sqrt(kappa * kappa + excess)
    if p is Polarization.TE:
        return -excess / (kappa + big_k) ** 2
    return -(1.0 - inv) * (kappa * kappa + k2 * inv) / (big_k * inv + kappa) ** 2


def _bulk_reflection(model, p, k2, kappa, xi, c):
    excess, inv = _response(model, xi)
    return _fresnel(p, k2, kappa, excess / (c * c), inv)


def _static_limit(model, p, k, c):
    """Exact xi -> 0 amplitudes; the m = 0 Matsubara term depends on these."""
    if isinstance(model, Vacuum):
        return np.zeros_like(k)
    if p is Polarization.TM:
        if isinstance(model, (Plasma, Drude)):
            return -np.ones_like(k)
        eps0 = 1.0 + _kk_excess(model, np.zeros(1))[0]
        return np.full_like(k, -(eps0 - 1.0) / (eps0 + 1.0))
    if isinstance(model, Plasma):
        kp = model.omega_p / c
        return -kp * kp / (k + np.sqrt(k * k + kp * kp)) ** 2
    # Drude and dielectric TE: K -> kappa as xi -> 0
    return np.zeros_like(k)


def reflection_imaginary(mirror: MirrorSpec, p: Polarization, k, xi, c: float = C_LIGHT):
    """Reflection amplitude ``r(i xi)`` seen from inside the cavity.

    Parameters
    ----------
    mirror : MirrorSpec
    p : Polarization
    k : float or ndarray
        Transverse wavevector, rad/m, ``k >= 0``.
    xi : float or ndarray
        Imaginary frequency, rad/s, ``xi >= 0``.  At ``xi = 0`` the analytic
        static limits are returned (Drude TE vanishes, plasma TE does not).

    Returns
    -------
    float or ndarray
        Real amplitude; in ``[-1, 0]`` for bulk and perfect mirrors.
    """
    k, xi = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(xi, dtype=float))
    if np.any(k < 0) or np.any(xi < 0):
        raise DomainError("k and xi must be non-negative")
    if np.any((k == 0) & (xi == 0)):
        raise DomainError("(k, xi) = (0, 0) is excluded")
    if isinstance(mirror, Perfect):
        return -np.ones_like(k)[()]
    if isinstance(mirror, PrescribedAmplitude):
        return (-mirror.r0 / (1.0 + xi / mirror.omega_c) ** 2)[()]
    if not isinstance(mirror, Bulk):
        raise UnsupportedModelError(f"unknown mirror {mirror!r}")
    model = mirror.dielectric
    static = xi == 0
    out = np.empty_like(k)
    if np.any(~static):
        kk, xx = k[~static], xi[~static]
        kappa = np.hypot(kk, xx / c)
        out[~static] = _bulk_reflection(model, p, kk * kk, kappa, xx, c)
    if np.any(static):
        out[static] = _static_limit(model, p, k[static], c)
    return out[()]


def prepare_reflection(mirror: MirrorSpec, xi, c: float = C_LIGHT):
    """Amplitude at fixed imaginary frequencies as a function of ``kappa``.

    Returns ``r(p, k2, kappa)`` for the frequencies ``xi`` (any shape that
    broadcasts against ``kappa``), with the frequency-only part of the
    dielectric response computed once.  This is the fast path of the mode
    integrals; rows with ``xi = 0`` reduce to the static limits of
    :func:`reflection_imaginary` because the rearranged formulas stay finite.
    """
    xi = np.asarray(xi, dtype=float)
    if isinstance(mirror, Perfect):
        return lambda p, k2, kappa: -np.ones_like(kappa)
    if isinstance(mirror, PrescribedAmplitude):
        r = -mirror.r0 / (1.0 + xi / mirror.omega_c) ** 2
        return lambda p, k2, kappa: np.broadcast_to(r, np.broadcast(r, kappa).shape)
    if not isinstance(mirror, Bulk):
        raise UnsupportedModelError(f"unknown mirror {mirror!r}")
    excess, inv = _response(mirror.dielectric, xi)
    excess = excess / (c * c)

    def amplitude(p, k2, kappa):
        return _fresnel(p, k2, kappa, excess, inv)

    return amplitude


# -- real axis ---------------------------------------------------------------

def _sqrt_re_pos(z):
    """Square root with positive real part, continued from above the real axis.

    On the negative real axis the limit from ``Im omega -> 0+`` (where the
    argument approaches from below) is ``-i sqrt(|z|)``.
    """
    z = np.asarray(z, dtype=complex)
    root = np.sqrt(z)
    cut = (z.imag == 0) & (z.real < 0)
    if np.any(cut):
        root = np.array(root)
        root[cut] = -1j * np.sqrt(-z.real[cut])
    return root


def epsilon_real(model: DielectricModel, omega):
    """Dielectric function at real (or upper-half-plane) frequency ``omega``."""
    if isinstance(model, Tabulated):
        raise UnsupportedModelError("tabulated models have no real-axis continuation here")
    omega = np.asarray(omega)
    if np.any(omega == 0):
        raise DomainError("omega must be non-zero")
    if isinstance(model, Vacuum):
        return (np.ones_like(omega, dtype=complex))[()]
    if isinstance(model, Plasma):
        return (1.0 - model.omega_p ** 2 / (omega * omega) + 0j)[()]
    if isinstance(model, Drude):
        return (1.0 - model.omega_p ** 2 / (omega * (omega + 1j * model.gamma_d)))[()]
    raise UnsupportedModelError(f"unknown dielectric model {model!r}")


def reflection_real(mirror: MirrorSpec, p: Polarization, k, omega, c: float = C_LIGHT):
    """Reflection amplitude at real frequency ``omega`` (complex ``omega`` with
    ``Im omega >= 0`` is also accepted).

    Perfect mirrors are rejected: they are not transparent at high frequency,
    so the real-axis representation of the force does not apply to them.
    """
    if isinstance(mirror, Perfect):
        raise UnsupportedModelError("perfect mirrors have no real-axis representation")
    omega = np.asarray(omega)
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise DomainError("k must be non-negative")
    if np.iscomplexobj(omega):
        if np.any(omega.imag < 0) or np.any((omega.imag == 0) & (omega.real <= 0)):
            raise DomainError("omega must lie above the real axis or be real positive")
    elif np.any(omega <= 0):
        raise DomainError("omega must be positive")
    if isinstance(mirror, PrescribedAmplitude):
        r = -mirror.r0 / (1.0 - 1j * omega / mirror.omega_c) ** 2
        return np.broadcast_to(r, np.broadcast(k, omega).shape).copy()[()]
    if not isinstance(mirror, Bulk):
        raise UnsupportedModelError(f"unknown mirror {mirror!r}")
    eps = epsilon_real(mirror.dielectric, omega)
    w2 = (omega / c) ** 2
    kappa = _sqrt_re_pos(k * k - w2)
    big_k = _sqrt_re_pos(k * k - eps * w2)
    if p is Polarization.TE:
        return ((kappa - big_k) / (kappa + big_k))[()]
    return ((big_k - eps * kappa) / (big_k + eps * kappa))[()]


# -- tabulated data ----------------------------------------------------------

def ingest_tabulated(raw: Union[str, TextIO], name: str = "") -> Tabulated:
    """Parse ``omega eps_imag`` rows (space, tab or comma separated).

    Lines starting with ``#`` and blank lines are ignored; ``omega`` is in
    rad/s.  Rows must already be in strictly increasing ``omega`` order.
    """
    stream = io.StringIO(raw) if isinstance(raw, str) else raw
    omega, loss = [], []
    for lineno, line in enumerate(stream, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        fields = text.replace(",", " ").split()
        if len(fields) != 2:
            raise FormatError(f"line {lineno}: expected 2 columns, got {len(fields)}")
        try:
            w, e = float(fields[0]), float(fields[1])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
        omega.append(w)
        loss.append(e)
    if len(omega) < 4:
        raise InsufficientDataError(f"need at least 4 rows, got {len(omega)}")
    if any(e < 0 for e in loss):
        bad = next(i for i, e in enumerate(loss) if e < 0)
        raise ValidityError(f"row {bad + 1}: negative Im eps {loss[bad]}")
    for i in range(1, len(omega)):
        if not omega[i] > omega[i - 1]:
            raise FormatError(f"row {i + 1}: omega not strictly increasing")
    return Tabulated(np.array(omega), np.array(loss), name=name)
