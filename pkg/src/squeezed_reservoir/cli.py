"""Command-line front end.

    squeezed-reservoir run CONFIG [--validate-only]
    squeezed-reservoir sweep CONFIG --axis r --values 0,0.5,1 [--jobs N]
    squeezed-reservoir --version

Exit codes: 0 success, 1 validation error, 2 runtime or invariant-monitor
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analytic import analytic_trajectory, asymptotic_state
from .config import SWEEP_AXES, RunConfig, parse_config, validate_config, with_axis_value
from .diagnostics import (
    convergence_study,
    fidelity,
    mean_photon_number,
    purity,
    quadrature_variances,
    trace_distance,
)
from .errors import ConfigError, InsufficientDataError, SimulationError
from .fock import POSITIVITY_TOL, density_from_spec
from .liouvillian import build_lindblad, integrate, spectrum

log = logging.getLogger("squeezed_reservoir")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3

TRAJECTORY_COLUMNS = (
    "t",
    "Gamma_int",
    "y",
    "mean_photon_number",
    "min_variance",
    "max_variance",
    "principal_angle",
    "purity",
    "trace_defect",
    "fidelity_to_steady",
    "trace_distance_to_steady",
)
INTER_METHOD_COLUMN = "inter_method_distance"

# analytic states are exact up to roundoff plus truncation leakage
ANALYTIC_TRACE_TOL = 1e-10


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".17g")


@dataclass
class RunResult:
    exit_code: int
    summary: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)


def _monitor_trips(traj, method, trace_tol):
    trips = []
    for t, rho, leak in zip(traj.times, traj.states, traj.leakage):
        herm = float(np.linalg.norm(rho - rho.conj().T, "fro"))
        defect = abs(1 - float(np.real(np.trace(rho))))
        lam = float(np.linalg.eigvalsh(rho)[0])
        if herm > 1e-12:
            trips.append({"method": method, "t": float(t), "check": "hermiticity",
                          "magnitude": herm})
        if defect >= trace_tol + leak:
            trips.append({"method": method, "t": float(t), "check": "trace_defect",
                          "magnitude": defect})
        if lam <= -POSITIVITY_TOL:
            trips.append({"method": method, "t": float(t), "check": "positivity",
                          "magnitude": -lam})
    return trips


def _ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def execute(cfg: RunConfig, write: bool = True) -> RunResult:
    """Run one configuration and (optionally) write its output files.

    Rows describe the analytic trajectory when it was computed, otherwise
    the numeric one; with ``method: both`` each row also carries the trace
    distance between the two.
    """
    rho0 = density_from_spec(cfg.initial_state, cfg.dim, cfg.leakage_tol)
    steady = asymptotic_state(cfg.squeeze, cfg.dim, cfg.leakage_tol)

    trajectories = {}
    if cfg.method in ("analytic", "both"):
        trajectories["analytic"] = analytic_trajectory(rho0, cfg.gamma_profile, cfg.squeeze,
                                                       cfg.times)
    if cfg.method in ("numeric", "both"):
        trajectories["numeric"] = integrate(rho0, cfg.gamma_profile, cfg.squeeze, cfg.times,
                                            tol=cfg.ode_tol)
    primary = trajectories["analytic" if "analytic" in trajectories else "numeric"]

    trips = []
    if "analytic" in trajectories:
        trips += _monitor_trips(trajectories["analytic"], "analytic", ANALYTIC_TRACE_TOL)
    if "numeric" in trajectories:
        trips += _monitor_trips(trajectories["numeric"], "numeric", 10 * cfg.ode_tol)

    rows = []
    inter = []
    for i, (t, rho) in enumerate(zip(primary.times, primary.states)):
        g = float(primary.gamma_int[i])
        quad = quadrature_variances(rho)
        row = {
            "t": t,
            "Gamma_int": g,
            "y": -np.expm1(-g),
            "mean_photon_number": mean_photon_number(rho),
            "min_variance": quad.min_variance,
            "max_variance": quad.max_variance,
            "principal_angle": quad.principal_angle,
            "purity": purity(rho),
            "trace_defect": 1 - float(np.real(np.trace(rho))),
            "fidelity_to_steady": fidelity(rho, steady),
            "trace_distance_to_steady": trace_distance(rho, steady),
        }
        if cfg.method == "both":
            d = trace_distance(rho, trajectories["numeric"].states[i])
            row[INTER_METHOD_COLUMN] = d
            inter.append(d)
        rows.append(row)

    try:
        fitted_rate = convergence_study(primary, cfg.squeeze, cfg.leakage_tol).fitted_rate
        fit_note = None if fitted_rate is not None else "already converged; fit skipped"
    except InsufficientDataError as exc:
        fitted_rate, fit_note = None, str(exc)

    steady_quad = quadrature_variances(steady)
    summary = {
        "version": __version__,
        "method": cfg.method,
        "dim": cfg.dim,
        "r": cfg.squeeze.r,
        "theta": cfg.squeeze.theta,
        "final_fidelity_to_steady": rows[-1]["fidelity_to_steady"],
        "final_trace_distance_to_steady": rows[-1]["trace_distance_to_steady"],
        "final_mean_photon_number": rows[-1]["mean_photon_number"],
        "final_min_variance": rows[-1]["min_variance"],
        "final_max_variance": rows[-1]["max_variance"],
        "final_leakage": float(primary.leakage[-1]),
        "fitted_convergence_rate": fitted_rate,
        "fit_note": fit_note,
        "max_trace_defect": max(
            abs(1 - float(np.real(np.trace(s)))) for tr in trajectories.values() for s in tr.states
        ),
        "inter_method_max_distance": max(inter) if inter else None,
        "steady_state": {
            "min_variance": steady_quad.min_variance,
            "max_variance": steady_quad.max_variance,
            "squeezed_quadrature_angle": steady_quad.principal_angle,
            "mean_photon_number": mean_photon_number(steady),
        },
        "monitor_trips": trips,
    }

    if cfg.spectrum_path is not None:
        gamma_ref = cfg.gamma_profile.asymptotic_rate
        ev = spectrum(build_lindblad(cfg.dim, cfg.squeeze, gamma_ref))
        summary["spectrum"] = {
            "gamma": gamma_ref,
            "zero_modes": int(np.sum(np.abs(ev) < 1e-8)),
            "slowest_nonzero_real_part": float(ev[np.abs(ev) >= 1e-8][0].real)
            if np.any(np.abs(ev) >= 1e-8) else None,
        }
        if write:
            _ensure_parent(cfg.spectrum_path)
            with open(cfg.spectrum_path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["index", "real", "imag"])
                for k, lam in enumerate(ev):
                    w.writerow([k, _fmt(lam.real), _fmt(lam.imag)])

    if write:
        columns = list(TRAJECTORY_COLUMNS)
        if cfg.method == "both":
            columns.append(INTER_METHOD_COLUMN)
        _ensure_parent(cfg.trajectory_path)
        with open(cfg.trajectory_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([_fmt(row[c]) for c in columns])
        _ensure_parent(cfg.diagnostics_path)
        with open(cfg.diagnostics_path, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")

    for trip in trips:
        log.error("invariant monitor tripped: %s", trip)
    return RunResult(EXIT_RUNTIME if trips else EXIT_OK, summary, rows)


def run_config_file(path: str, validate_only: bool = False) -> RunResult:
    """Load, validate and run a config file, mapping failures to exit codes."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return RunResult(EXIT_IO, {"error": str(exc)})
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        log.error("invalid config: %s", exc)
        return RunResult(EXIT_VALIDATION, {"error": str(exc)})
    if validate_only:
        return RunResult(EXIT_OK)
    return _guarded_execute(cfg)


def _guarded_execute(cfg: RunConfig) -> RunResult:
    try:
        return execute(cfg)
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return RunResult(EXIT_IO, {"error": str(exc)})
    except SimulationError as exc:
        log.error("run failed: %s", exc)
        return RunResult(EXIT_RUNTIME, {"error": f"{type(exc).__name__}: {exc}"})


def _suffixed(path: str, axis: str, value) -> str:
    root, ext = os.path.splitext(path)
    return f"{root}_{axis}={value}{ext}"


SUMMARY_COLUMNS = (
    "value",
    "exit_code",
    "final_fidelity_to_steady",
    "final_min_variance",
    "final_max_variance",
    "final_mean_photon_number",
    "final_leakage",
    "fitted_convergence_rate",
    "max_trace_defect",
    "inter_method_max_distance",
    "error",
)


def _sweep_point(args):
    doc, axis, value = args
    try:
        point = with_axis_value(doc, axis, value)
        outputs = point["outputs"]
        for key in ("trajectory_path", "diagnostics_path", "spectrum_path"):
            if outputs.get(key):
                outputs[key] = _suffixed(outputs[key], axis, value)
        cfg = validate_config(point)
    except ConfigError as exc:
        return value, RunResult(EXIT_VALIDATION, {"error": str(exc)})
    return value, _guarded_execute(cfg)


def sweep(base: RunConfig, axis: str, values, jobs: int = 1, summary_path: str | None = None):
    """Run ``base`` once per value of ``axis`` and write a combined summary table.

    Each point writes its own files (paths suffixed with ``_<axis>=<value>``).
    A failing point is recorded in the table and does not stop the sweep.
    Returns the list of ``(value, RunResult)`` in input order.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {list(SWEEP_AXES)}", "axis")
    values = list(values)
    if not values:
        raise ConfigError("sweep axis has no values", "values")
    tasks = [(base.raw, axis, v) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]

    if summary_path is None:
        root, _ = os.path.splitext(base.diagnostics_path)
        summary_path = f"{root}_sweep_{axis}.csv"
    _ensure_parent(summary_path)
    with open(summary_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([axis] + list(SUMMARY_COLUMNS[1:]))
        for value, res in results:
            s = res.summary
            w.writerow([value, res.exit_code]
                       + [_fmt(s.get(c)) for c in SUMMARY_COLUMNS[2:-1]]
                       + [s.get("error", "")])
    return results


def _parse_values(text: str, axis: str):
    kind = int if axis == "dim" else float
    items = [x.strip() for x in text.split(",") if x.strip()]
    try:
        return [kind(x) for x in items]
    except ValueError:
        raise ConfigError(f"cannot parse sweep values {text!r}", "values") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="squeezed-reservoir",
        description="Cavity mode in a time-dependent squeezed-vacuum bath: numeric and exact "
                    "propagation, diagnostics, parameter sweeps.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--validate-only", action="store_true",
                    help="validate the config and exit without running")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one configuration")
    p_run.add_argument("config")
    p_run.add_argument("--validate-only", action="store_true", dest="validate_only_sub")
    p_sweep = sub.add_parser("sweep", help="run a configuration over one parameter axis")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    p_sweep.add_argument("--values", required=True, help="comma-separated list")
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p_sweep.add_argument("--summary", default=None, help="summary table path")
    p_sweep.add_argument("--validate-only", action="store_true", dest="validate_only_sub")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    validate_only = args.validate_only or args.validate_only_sub
    if args.command == "run":
        return run_config_file(args.config, validate_only).exit_code

    try:
        with open(args.config) as fh:
            base = parse_config(fh.read())
        values = _parse_values(args.values, args.axis)
        if not values:
            raise ConfigError("sweep axis has no values", "values")
        if validate_only:
            for v in values:
                validate_config(with_axis_value(base.raw, args.axis, v))
            return EXIT_OK
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO
    except ConfigError as exc:
        log.error("invalid sweep: %s", exc)
        return EXIT_VALIDATION
    try:
        results = sweep(base, args.axis, values, jobs=args.jobs, summary_path=args.summary)
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    return max(res.exit_code for _, res in results)


if __name__ == "__main__":
    sys.exit(main())
