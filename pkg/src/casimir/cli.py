"""Command-line front end.

``casimir force|sweep|compare|ingest|check``.  Exit status is 0 when every
emitted value converged, 2 when some value did not (it is still emitted,
flagged ``converged=false``) and 1 on configuration or model errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

from . import config as cfgmod
from .config import RunConfig
from .errors import CasimirError, ConfigError, UnsupportedModelError
from .forces import (Evaluator, ThermalState, default_eta, poisson_residual,
                     pressure_exp_series, pressure_matsubara, pressure_perfect_closed_form,
                     pressure_real_axis, pressure_zero_temperature, te_m0_term)
from .materials import Perfect, epsilon_imaginary, ingest_tabulated

EXIT_OK, EXIT_USAGE, EXIT_UNCONVERGED = 0, 1, 2


# -- evaluation ---------------------------------------------------------------

def evaluate(cfg: RunConfig) -> dict:
    """Pressure and requested diagnostics for a single-point configuration."""
    ev = cfg.resolved_evaluator()
    T = cfg.temperature
    cav = cfg.cavity
    tol = cfg.tolerance
    state = ThermalState(T, cfg.constants)
    if ev is Evaluator.CLOSED_FORM:
        if not (isinstance(cav.mirror1, Perfect) and isinstance(cav.mirror2, Perfect)):
            raise UnsupportedModelError("closed_form applies to two perfect mirrors only")
        if T != 0:
            raise UnsupportedModelError("closed_form is the zero-temperature result; set temperature = 0")
        p = pressure_perfect_closed_form(cav.separation_L, cfg.constants)
        pressure, error, evals, ok = p, 0.0, 0, True
    else:
        if ev is Evaluator.ZERO_TEMPERATURE:
            if T != 0:
                raise ConfigError("zero_temperature evaluator needs temperature = 0")
            rep = pressure_zero_temperature(cav, tol, cfg.constants)
        elif ev is Evaluator.MATSUBARA:
            rep = pressure_matsubara(cav, state, tol)
        elif ev is Evaluator.EXP_SERIES:
            rep = pressure_exp_series(cav, state, tol)
        else:
            eta = cfg.eta if cfg.eta is not None else default_eta(cav.separation_L, cfg.constants)
            rep = pressure_real_axis(cav, state, eta, tol)
        r = rep.result
        pressure, error, evals, ok = rep.pressure, r.error_estimate, r.evaluations, r.converged
    row = {"pressure_Pa": pressure, "error_Pa": error, "evaluations": evals,
           "converged": ok, "evaluator": ev.value, "tolerance_rel": tol.rel}
    if cfg.area is not None:
        row["force_N"] = pressure * cfg.area
    if cfg.te_m0 and T > 0:
        row["te_m0_Pa"] = te_m0_term(cav, state, tol)
    if cfg.poisson and T > 0:
        res = poisson_residual(cav, state, tol)
        row["poisson_residual_Pa"] = res.value
        row["poisson_residual_error_Pa"] = res.error_estimate
        row["poisson_converged"] = res.converged
    return row


def _point_job(args):
    cfg, variable, value = args
    try:
        return _tag(evaluate(cfg), variable, value)
    except CasimirError as exc:
        return {"__error__": f"{type(exc).__name__}: {exc}"}


def _tag(row: dict, variable: str, value: float) -> dict:
    return {"sweep_var": variable, "value": value, **row}


def _run_points(jobs_args: list, jobs: int) -> list[dict]:
    if jobs > 1 and len(jobs_args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_point_job, jobs_args))
    else:
        rows = [_point_job(a) for a in jobs_args]
    for row in rows:
        if "__error__" in row:
            raise ConfigError(row["__error__"])
    return rows


def sweep_points(cfg: RunConfig) -> list[tuple[RunConfig, str, float]]:
    if cfg.sweep is None:
        return [(cfg, "L", cfg.cavity.separation_L)]
    var = cfg.sweep.variable
    return [(cfg.at(var, v), var, v) for v in cfg.sweep.values()]


# -- output -----------------------------------------------------------------------

BASE_COLUMNS = ["sweep_var", "value", "pressure_Pa", "error_Pa", "evaluations", "converged"]
OPTIONAL_COLUMNS = ["te_m0_Pa", "poisson_residual_Pa", "poisson_residual_error_Pa",
                    "poisson_converged"]
TRAILING_COLUMNS = ["evaluator", "tolerance_rel", "force_N"]


def _columns(rows: list[dict], leading: list[str], optional: list[str],
             trailing: list[str]) -> list[str]:
    present = set().union(*rows) if rows else set()
    return leading + [c for c in optional if c in present] + \
        [c for c in trailing if c in present or c in ("evaluator", "tolerance_rel")]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, float):
        # same 17-digit rendering as the CSV output
        return float(format(value, ".17g"))
    return value


def render(rows: list[dict], columns: list[str], fmt: str, command: str) -> str:
    if fmt == "json":
        doc = {"command": command, "columns": columns,
               "rows": [{c: _json_value(r.get(c)) for c in columns} for r in rows]}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow(["" if r.get(c) is None else _fmt(r[c]) for c in columns])
    return buf.getvalue()


# -- commands ---------------------------------------------------------------------

def _load_raw(args) -> dict[str, str]:
    raw: dict[str, str] = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw.update(cfgmod.parse_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    for item in args.set or []:
        k, v = cfgmod.parse_override(item)
        raw[k] = v
    if args.tolerance is not None:
        raw["tolerance.rel"] = args.tolerance
    if args.output is not None:
        raw["output"] = args.output
    return raw


def _status(rows: list[dict]) -> int:
    return EXIT_OK if all(r["converged"] for r in rows) else EXIT_UNCONVERGED


def cmd_force(args, out) -> int:
    cfg = cfgmod.build(_load_raw(args), args.registry)
    if cfg.sweep is not None:
        raise ConfigError("configuration has a sweep; use 'casimir sweep'")
    rows = _run_points(sweep_points(cfg), 1)
    out.write(render(rows, _columns(rows, BASE_COLUMNS, OPTIONAL_COLUMNS, TRAILING_COLUMNS),
                     cfg.output, "force"))
    return _status(rows)


def cmd_sweep(args, out) -> int:
    cfg = cfgmod.build(_load_raw(args), args.registry)
    if cfg.sweep is None:
        raise ConfigError("sweep needs sweep.variable, sweep.from, sweep.to and sweep.points")
    rows = _run_points(sweep_points(cfg), args.jobs)
    out.write(render(rows, _columns(rows, BASE_COLUMNS, OPTIONAL_COLUMNS, TRAILING_COLUMNS),
                     cfg.output, "sweep"))
    return _status(rows)


def _label(cfg: RunConfig) -> str:
    def name(m):
        return type(getattr(m, "dielectric", m)).__name__.lower()
    m1, m2 = name(cfg.cavity.mirror1), name(cfg.cavity.mirror2)
    mirrors = m1 if m1 == m2 else f"{m1}/{m2}"
    return f"{cfg.resolved_evaluator().value}:{mirrors}"


def cmd_compare(args, out) -> int:
    raw = _load_raw(args)
    base_raw, other_raw = cfgmod.split_compare(raw)
    if any(k.startswith("sweep.") or k == "output" for k in raw if k.startswith("compare.")):
        raise ConfigError("compare.* may not override the sweep or the output format")
    a = cfgmod.build(base_raw, args.registry)
    b = cfgmod.build(other_raw, args.registry)
    pts_a, pts_b = sweep_points(a), sweep_points(b)
    rows_a = _run_points(pts_a, args.jobs)
    # run both sides even when identical: a zero difference then checks determinism
    rows_b = _run_points(pts_b, args.jobs)
    label_a, label_b = _label(a), _label(b)
    rows = []
    for (ca, var, val), (cb, _, _), ra, rb in zip(pts_a, pts_b, rows_a, rows_b):
        diff = ra["pressure_Pa"] - rb["pressure_Pa"]
        scale = max(abs(ra["pressure_Pa"]), abs(rb["pressure_Pa"]))
        row = {"sweep_var": var, "value": val, "label_a": label_a, "label_b": label_b,
               "pressure_a_Pa": ra["pressure_Pa"], "error_a_Pa": ra["error_Pa"],
               "pressure_b_Pa": rb["pressure_Pa"], "error_b_Pa": rb["error_Pa"],
               "abs_diff_Pa": diff, "rel_diff": diff / scale if scale > 0 else 0.0,
               "combined_error_Pa": ra["error_Pa"] + rb["error_Pa"],
               "converged": ra["converged"] and rb["converged"],
               "tolerance_rel": a.tolerance.rel}
        if ca.temperature > 0:
            row["te_m0_a_Pa"] = te_m0_term(ca.cavity, ThermalState(ca.temperature, ca.constants),
                                           ca.tolerance)
            row["te_m0_b_Pa"] = te_m0_term(cb.cavity, ThermalState(cb.temperature, cb.constants),
                                           cb.tolerance)
        for side, r in (("a", ra), ("b", rb)):
            if "poisson_residual_Pa" in r:
                row[f"poisson_residual_{side}_Pa"] = r["poisson_residual_Pa"]
        rows.append(row)
    leading = ["sweep_var", "value", "label_a", "label_b", "pressure_a_Pa", "error_a_Pa",
               "pressure_b_Pa", "error_b_Pa", "abs_diff_Pa", "rel_diff", "combined_error_Pa",
               "converged"]
    optional = ["te_m0_a_Pa", "te_m0_b_Pa", "poisson_residual_a_Pa", "poisson_residual_b_Pa"]
    present = set().union(*rows)
    columns = leading + [c for c in optional if c in present] + ["tolerance_rel"]
    out.write(render(rows, columns, a.output, "compare"))
    return _status(rows)


_NAME = re.compile(r"^[A-Za-z0-9_.-]+$")


def cmd_ingest(args, out) -> int:
    name = args.name or os.path.splitext(os.path.basename(args.path))[0]
    if not _NAME.match(name):
        raise ConfigError(f"material name {name!r} may only use letters, digits, '_', '.', '-'")
    try:
        with open(args.path, encoding="utf-8") as fh:
            model = ingest_tabulated(fh, name)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.path}: {exc}") from None
    w = model.omega
    probes = [float(w[0]), float(math.sqrt(w[0] * w[-1])), float(w[-1])]
    eps = [float(epsilon_imaginary(model, x)) for x in probes]
    os.makedirs(args.registry, exist_ok=True)
    with open(os.path.join(args.registry, f"{name}.txt"), "w", encoding="utf-8") as fh:
        fh.write(f"# {name}: omega (rad/s), Im eps\n")
        for a, b in zip(model.omega, model.eps_imag):
            fh.write(f"{format(float(a), '.17g')} {format(float(b), '.17g')}\n")
    rows = [{"name": name, "samples": int(len(w)), "omega_min": float(w[0]),
             "omega_max": float(w[-1]), "xi": x, "epsilon_imaginary": e}
            for x, e in zip(probes, eps)]
    cols = ["name", "samples", "omega_min", "omega_max", "xi", "epsilon_imaginary"]
    out.write(render(rows, cols, args.output or "csv", "ingest"))
    return EXIT_OK


def cmd_check(args, out) -> int:
    from .battery import run_battery
    results = run_battery()
    rows = [{"check": name, "passed": ok, "detail": detail} for name, ok, detail in results]
    if args.output == "json":
        out.write(render(rows, ["check", "passed", "detail"], "json", "check"))
    else:
        for r in rows:
            out.write(f"{'PASS' if r['passed'] else 'FAIL'}  {r['check']}: {r['detail']}\n")
    return EXIT_OK if all(r["passed"] for r in rows) else EXIT_UNCONVERGED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    common.add_argument("--output", choices=("csv", "json"))
    common.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="sweep points computed in parallel")
    common.add_argument("--tolerance", metavar="REL", help="relative tolerance")
    common.add_argument("--registry", default=cfgmod.DEFAULT_REGISTRY, metavar="DIR",
                        help="directory of ingested materials (default %(default)s)")

    parser = argparse.ArgumentParser(
        prog="casimir", description="Casimir pressure between two plane mirrors.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("force", parents=[common], help="pressure (and force) for one configuration")
    sub.add_parser("sweep", parents=[common], help="pressure over an L or T grid")
    sub.add_parser("compare", parents=[common],
                   help="two evaluators or two mirror models side by side")
    ing = sub.add_parser("ingest", parents=[common], help="validate and register a table")
    ing.add_argument("path")
    ing.add_argument("--name", help="material name (default: file stem)")
    sub.add_parser("check", parents=[common], help="run the built-in analytic battery")
    return parser


COMMANDS = {"force": cmd_force, "sweep": cmd_sweep, "compare": cmd_compare,
            "ingest": cmd_ingest, "check": cmd_check}


def main(argv: Optional[list[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.jobs < 1:
        print("casimir: error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except (CasimirError, ValueError) as exc:
        print(f"casimir: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
