"""Run configuration: flat ``key = value`` text with dotted section names.

All physical inputs are SI.  Recognised keys::

    mirror1.model      perfect | vacuum | plasma | drude | tabulated | prescribed
    mirror1.omega_p    plasma frequency, rad/s (plasma, drude)
    mirror1.gamma_d    damping rate, rad/s (drude)
    mirror1.r0         amplitude in (0, 1] (prescribed)
    mirror1.omega_c    cutoff, rad/s (prescribed)
    mirror1.material   name of an ingested table (tabulated)
    mirror1.file       path of a table file (tabulated, instead of material)
    mirror2.*          as mirror1; omitted entirely -> same as mirror1
    cavity.L           separation, m
    temperature        K (default 0)
    evaluator          auto | matsubara | exp_series | zero_temperature |
                       real_axis | closed_form   (auto: zero_temperature at
                       T = 0, matsubara otherwise)
    eta                real-axis damping, rad/s (default 0.0025 c/L)
    tolerance.rel      relative accuracy (default 1e-8)
    tolerance.abs      absolute accuracy, Pa (default 0)
    tolerance.max_evals
    sweep.variable     L | T
    sweep.from, sweep.to, sweep.points, sweep.spacing (linear | log)
    area               m^2; adds a force column
    output             csv | json
    diagnostics.te_m0  true | false  (te_m0_Pa column, T > 0 only)
    diagnostics.poisson true | false (poisson_residual_Pa column, T > 0 only)
    constants.hbar, constants.c_light, constants.k_B
    compare.<key>      override of any key above for the second run of
                       ``casimir compare``
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .cavity import CavityConfig
from .constants import CODATA, Constants
from .errors import CasimirError, ConfigError
from .forces import Evaluator
from .materials import (Bulk, Drude, Perfect, Plasma, PrescribedAmplitude,
                        Vacuum, ingest_tabulated)
from .quad import Tolerance

MIRROR_KEYS = ("model", "omega_p", "gamma_d", "r0", "omega_c", "material", "file")
TOP_KEYS = {
    "cavity.L", "temperature", "evaluator", "eta", "tolerance.rel", "tolerance.abs",
    "tolerance.max_evals", "sweep.variable", "sweep.from", "sweep.to", "sweep.points",
    "sweep.spacing", "area", "output", "diagnostics.te_m0", "diagnostics.poisson",
    "constants.hbar", "constants.c_light", "constants.k_B",
}
KNOWN_KEYS = TOP_KEYS | {f"mirror{j}.{k}" for j in (1, 2) for k in MIRROR_KEYS}
DEFAULT_REGISTRY = os.path.join(".casimir", "materials")


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    points: int
    spacing: str = "linear"

    def values(self) -> list[float]:
        if self.spacing == "log":
            grid = np.geomspace(self.start, self.stop, self.points)
        else:
            grid = np.linspace(self.start, self.stop, self.points)
        # exact end points, independent of the grid arithmetic
        grid[0], grid[-1] = self.start, self.stop
        return [float(v) for v in grid]


@dataclass(frozen=True)
class RunConfig:
    cavity: CavityConfig
    temperature: float = 0.0
    evaluator: str = "auto"
    tolerance: Tolerance = Tolerance()
    sweep: Optional[Sweep] = None
    area: Optional[float] = None
    output: str = "csv"
    constants: Constants = CODATA
    eta: Optional[float] = None
    te_m0: bool = False
    poisson: bool = False

    def resolved_evaluator(self, temperature: Optional[float] = None) -> Evaluator:
        t = self.temperature if temperature is None else temperature
        if self.evaluator == "auto":
            return Evaluator.ZERO_TEMPERATURE if t == 0 else Evaluator.MATSUBARA
        return Evaluator(self.evaluator)

    def at(self, variable: str, value: float) -> "RunConfig":
        """Copy with the sweep variable set to ``value`` and no sweep."""
        if variable == "L":
            return replace(self, cavity=self.cavity.with_separation(value), sweep=None)
        return replace(self, temperature=value, sweep=None)


def parse_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        out[key] = value
    return out


def parse_override(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, value = (s.strip() for s in item.split("=", 1))
    return key, value


def _number(raw: dict, key: str, default=None, kind=float):
    if key not in raw:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    text = raw[key]
    try:
        value = kind(text) if kind is float else int(float(text))
    except ValueError:
        raise ConfigError(f"{key} = {text!r} is not a plain SI number") from None
    if kind is int and float(text) != value:
        raise ConfigError(f"{key} must be an integer, got {text!r}")
    if not np.isfinite(value):
        raise ConfigError(f"{key} must be finite, got {text!r}")
    return value


def _flag(raw: dict, key: str) -> bool:
    text = raw.get(key, "false").lower()
    if text in ("true", "yes", "1", "on"):
        return True
    if text in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key} must be true or false, got {raw[key]!r}")


def load_material(name: str, registry: str):
    path = os.path.join(registry, f"{name}.txt")
    if not os.path.isfile(path):
        raise ConfigError(f"material {name!r} is not registered in {registry}")
    with open(path, encoding="utf-8") as fh:
        return ingest_tabulated(fh, name)


def _mirror(raw: dict, j: int, registry: str):
    prefix = f"mirror{j}."
    model = raw.get(prefix + "model")
    if model is None:
        raise ConfigError(f"missing required key {prefix + 'model'!r}")
    model = model.lower()
    try:
        if model == "perfect":
            return Perfect()
        if model == "vacuum":
            return Bulk(Vacuum())
        if model == "plasma":
            return Bulk(Plasma(_number(raw, prefix + "omega_p")))
        if model == "drude":
            return Bulk(Drude(_number(raw, prefix + "omega_p"), _number(raw, prefix + "gamma_d")))
        if model == "prescribed":
            return PrescribedAmplitude(_number(raw, prefix + "r0"), _number(raw, prefix + "omega_c"))
        if model == "tabulated":
            if prefix + "file" in raw:
                path = raw[prefix + "file"]
                with open(path, encoding="utf-8") as fh:
                    return Bulk(ingest_tabulated(fh, os.path.basename(path)))
            if prefix + "material" in raw:
                return Bulk(load_material(raw[prefix + "material"], registry))
            raise ConfigError(f"{prefix}model = tabulated needs {prefix}material or {prefix}file")
    except ConfigError:
        raise
    except (CasimirError, ValueError) as exc:
        raise ConfigError(f"mirror{j}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"mirror{j}: cannot read table: {exc}") from None
    raise ConfigError(f"unknown mirror model {raw[prefix + 'model']!r}")


def build(raw: dict[str, str], registry: str = DEFAULT_REGISTRY) -> RunConfig:
    """Validate a key/value mapping and turn it into a :class:`RunConfig`."""
    unknown = sorted(k for k in raw if k not in KNOWN_KEYS and not k.startswith("compare."))
    if unknown:
        raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
    raw = dict(raw)
    if not any(k.startswith("mirror2.") for k in raw):
        for k in MIRROR_KEYS:
            if f"mirror1.{k}" in raw:
                raw[f"mirror2.{k}"] = raw[f"mirror1.{k}"]
    m1 = _mirror(raw, 1, registry)
    m2 = _mirror(raw, 2, registry)
    L = _number(raw, "cavity.L")
    if not L > 0:
        raise ConfigError(f"cavity.L must be positive, got {L}")
    cavity = CavityConfig(m1, m2, L)

    temperature = _number(raw, "temperature", 0.0)
    if not temperature >= 0:
        raise ConfigError(f"temperature must be >= 0 K, got {temperature}")
    evaluator = raw.get("evaluator", "auto").lower()
    if evaluator != "auto" and evaluator not in {e.value for e in Evaluator}:
        raise ConfigError(f"unknown evaluator {raw['evaluator']!r}")

    try:
        tol = Tolerance(rel=_number(raw, "tolerance.rel", 1e-8),
                        abs=_number(raw, "tolerance.abs", 0.0),
                        max_evals=_number(raw, "tolerance.max_evals", 2_000_000, int))
        constants = Constants(hbar=_number(raw, "constants.hbar", CODATA.hbar),
                              c_light=_number(raw, "constants.c_light", CODATA.c_light),
                              k_B=_number(raw, "constants.k_B", CODATA.k_B))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    sweep = None
    if any(k.startswith("sweep.") for k in raw):
        variable = raw.get("sweep.variable", "")
        if variable not in ("L", "T"):
            raise ConfigError(f"sweep.variable must be L or T, got {variable!r}")
        spacing = raw.get("sweep.spacing", "linear").lower()
        if spacing not in ("linear", "log"):
            raise ConfigError(f"sweep.spacing must be linear or log, got {spacing!r}")
        start = _number(raw, "sweep.from")
        stop = _number(raw, "sweep.to")
        points = _number(raw, "sweep.points", kind=int)
        if points < 2:
            raise ConfigError(f"sweep.points must be >= 2, got {points}")
        if start == stop:
            raise ConfigError("sweep.from and sweep.to coincide")
        if variable == "L" and not (start > 0 and stop > 0):
            raise ConfigError("an L sweep needs a positive range")
        if variable == "T" and not (start >= 0 and stop >= 0):
            raise ConfigError("a T sweep needs a non-negative range")
        if spacing == "log" and not (start > 0 and stop > 0):
            raise ConfigError("log spacing needs a strictly positive range")
        sweep = Sweep(variable, start, stop, points, spacing)

    area = None
    if "area" in raw:
        area = _number(raw, "area")
        if not area > 0:
            raise ConfigError(f"area must be positive, got {area}")
    output = raw.get("output", "csv").lower()
    if output not in ("csv", "json"):
        raise ConfigError(f"output must be csv or json, got {raw['output']!r}")
    eta = None
    if "eta" in raw:
        eta = _number(raw, "eta")
        if not eta > 0:
            raise ConfigError(f"eta must be positive, got {eta}")

    return RunConfig(cavity=cavity, temperature=temperature, evaluator=evaluator,
                     tolerance=tol, sweep=sweep, area=area, output=output,
                     constants=constants, eta=eta, te_m0=_flag(raw, "diagnostics.te_m0"),
                     poisson=_flag(raw, "diagnostics.poisson"))


def split_compare(raw: dict[str, str]) -> tuple[dict[str, str], dict[str, str]]:
    """Base keys and the second run's keys (base overridden by ``compare.*``)."""
    base = {k: v for k, v in raw.items() if not k.startswith("compare.")}
    overrides = {k[len("compare."):]: v for k, v in raw.items() if k.startswith("compare.")}
    if not overrides:
        raise ConfigError("compare needs at least one compare.<key> override")
    other = dict(base)
    # a mirror override replaces that mirror's whole section; a base with
    # only mirror1 keys stays symmetric because build() copies mirror1
    for j in (1, 2):
        if any(k.startswith(f"mirror{j}.") for k in overrides):
            for k in MIRROR_KEYS:
                other.pop(f"mirror{j}.{k}", None)
    other.update(overrides)
    return base, other
