"""Run configuration: a YAML document validated into a :class:`RunConfig`.

Example (``configs/minimal.yaml`` in the repository)::

    dim: 40
    squeeze: {r: 0.5, theta: 0.0}
    gamma_profile: {kind: constant, gamma0: 1.0}
    initial_state: {kind: fock, n: 0}
    time_grid: {t_end: 20.0, n_samples: 50}
    method: both
    tolerances: {ode_tol: 1.0e-9, leakage_tol: 1.0e-8}
    outputs:
      trajectory_path: out/trajectory.csv
      diagnostics_path: out/diagnostics.json
      spectrum_path: out/spectrum.csv
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import ConfigError, InvalidRateError
from .fock import DEFAULT_LEAKAGE_TOL, InitialStateSpec, SqueezeParams
from .liouvillian import DEFAULT_ODE_TOL
from .profiles import GammaProfile, profile_from_dict

METHODS = ("numeric", "analytic", "both")

_TOP_KEYS = {"dim", "squeeze", "gamma_profile", "initial_state", "time_grid", "method",
             "tolerances", "outputs"}
_REQUIRED = {"dim", "squeeze", "gamma_profile", "initial_state", "time_grid", "outputs"}
_SQUEEZE_KEYS = {"r", "theta"}
_TOL_KEYS = {"ode_tol", "leakage_tol"}
_OUTPUT_KEYS = {"trajectory_path", "diagnostics_path", "spectrum_path"}
_STATE_KEYS = {
    "fock": {"n"},
    "coherent": {"alpha"},
    "thermal": {"nbar"},
    "squeezed_vacuum": {"r", "theta"},
    "matrix": {"coefficients"},
}


@dataclass(frozen=True)
class RunConfig:
    dim: int
    squeeze: SqueezeParams
    gamma_profile: GammaProfile
    initial_state: InitialStateSpec
    times: np.ndarray
    method: str
    ode_tol: float
    leakage_tol: float
    trajectory_path: str
    diagnostics_path: str
    spectrum_path: str | None
    raw: dict  # validated document with defaults filled in; sweeps edit this


def _unknown(section: str, data: dict, allowed: set):
    extra = sorted(set(data) - allowed)
    if extra:
        raise ConfigError(f"unknown keys {extra}; allowed: {sorted(allowed)}", section)


def _mapping(section, value):
    if not isinstance(value, dict):
        raise ConfigError("expected a mapping", section)
    return value


def _number(section, value, kind=float):
    try:
        if isinstance(value, bool):
            raise TypeError
        out = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {value!r}", section) from None
    if kind is int and out != float(value):
        raise ConfigError(f"expected an integer, got {value!r}", section)
    if kind is not complex and not np.isfinite(out):
        raise ConfigError(f"expected a finite number, got {value!r}", section)
    return out


def _complex(section, value):
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_number(section, value[0]), _number(section, value[1]))
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            raise ConfigError(f"cannot parse complex number {value!r}", section) from None
    return complex(_number(section, value))


def _initial_state(data) -> InitialStateSpec:
    data = dict(_mapping("initial_state", data))
    kind = data.pop("kind", None)
    if kind not in _STATE_KEYS:
        raise ConfigError(f"kind must be one of {sorted(_STATE_KEYS)}, got {kind!r}",
                          "initial_state")
    _unknown("initial_state", data, _STATE_KEYS[kind])
    try:
        if kind == "fock":
            n = _number("initial_state.n", data.get("n"), int)
            if n < 0:
                raise ConfigError("must be >= 0", "initial_state.n")
            return InitialStateSpec.fock(n)
        if kind == "coherent":
            return InitialStateSpec.coherent(_complex("initial_state.alpha", data.get("alpha")))
        if kind == "thermal":
            nbar = _number("initial_state.nbar", data.get("nbar"))
            if nbar < 0:
                raise ConfigError("must be >= 0", "initial_state.nbar")
            return InitialStateSpec.thermal(nbar)
        if kind == "squeezed_vacuum":
            r = _number("initial_state.r", data.get("r"))
            if r < 0:
                raise ConfigError("must be >= 0", "initial_state.r")
            return InitialStateSpec.squeezed_vacuum(r, _number("initial_state.theta",
                                                               data.get("theta", 0.0)))
        rows = data.get("coefficients")
        if not isinstance(rows, list) or not all(isinstance(row, list) for row in rows):
            raise ConfigError("expected a list of rows", "initial_state.coefficients")
        table = [[_complex("initial_state.coefficients", x) for x in row] for row in rows]
        return InitialStateSpec.matrix(np.array(table, dtype=complex))
    except KeyError as exc:
        raise ConfigError(f"missing parameter {exc}", "initial_state") from None


def _time_grid(data) -> np.ndarray:
    data = _mapping("time_grid", data)
    if "times" in data:
        _unknown("time_grid", data, {"times"})
        if not isinstance(data["times"], list):
            raise ConfigError("times must be a list", "time_grid.times")
        t = np.array([_number("time_grid.times", x) for x in data["times"]])
        if t.size < 2 or t[0] != 0 or np.any(np.diff(t) <= 0):
            raise ConfigError("times must start at 0 and strictly increase", "time_grid.times")
        return t
    _unknown("time_grid", data, {"t_end", "n_samples"})
    t_end = _number("time_grid.t_end", data.get("t_end"))
    n = _number("time_grid.n_samples", data.get("n_samples"), int)
    if t_end <= 0:
        raise ConfigError("must be > 0", "time_grid.t_end")
    if n < 2:
        raise ConfigError("must be >= 2", "time_grid.n_samples")
    return np.linspace(0.0, t_end, n)


def validate_config(doc: dict) -> RunConfig:
    """Validate a parsed document and apply defaults."""
    doc = copy.deepcopy(_mapping("config", doc))
    _unknown("config", doc, _TOP_KEYS)
    missing = sorted(_REQUIRED - set(doc))
    if missing:
        raise ConfigError(f"missing required keys {missing}", "config")

    dim = _number("dim", doc["dim"], int)
    if dim < 4:
        raise ConfigError(f"must be >= 4, got {dim}", "dim")

    sq = _mapping("squeeze", doc["squeeze"])
    _unknown("squeeze", sq, _SQUEEZE_KEYS)
    r = _number("squeeze.r", sq.get("r"))
    if r < 0:
        raise ConfigError(f"must be >= 0, got {r}", "squeeze.r")
    squeeze = SqueezeParams(r, _number("squeeze.theta", sq.get("theta", 0.0)))

    try:
        profile = profile_from_dict(_mapping("gamma_profile", doc["gamma_profile"]))
    except InvalidRateError as exc:
        raise ConfigError(str(exc), "gamma_profile") from None

    initial = _initial_state(doc["initial_state"])
    times = _time_grid(doc["time_grid"])

    method = doc.setdefault("method", "both")
    if method not in METHODS:
        raise ConfigError(f"must be one of {list(METHODS)}, got {method!r}", "method")

    tols = doc.setdefault("tolerances", {})
    _mapping("tolerances", tols)
    _unknown("tolerances", tols, _TOL_KEYS)
    ode_tol = _number("tolerances.ode_tol", tols.setdefault("ode_tol", DEFAULT_ODE_TOL))
    leak_tol = _number("tolerances.leakage_tol",
                       tols.setdefault("leakage_tol", DEFAULT_LEAKAGE_TOL))
    for name, value in (("ode_tol", ode_tol), ("leakage_tol", leak_tol)):
        if value <= 0:
            raise ConfigError(f"must be > 0, got {value}", f"tolerances.{name}")

    outputs = _mapping("outputs", doc["outputs"])
    _unknown("outputs", outputs, _OUTPUT_KEYS)
    for key in ("trajectory_path", "diagnostics_path"):
        if not isinstance(outputs.get(key), str) or not outputs[key]:
            raise ConfigError("a file path is required", f"outputs.{key}")
    spectrum_path = outputs.get("spectrum_path")
    if spectrum_path is not None and method == "analytic":
        raise ConfigError("spectrum output needs the numeric Liouvillian; use method "
                          "'numeric' or 'both'", "outputs.spectrum_path")

    return RunConfig(dim, squeeze, profile, initial, times, method, ode_tol, leak_tol,
                     outputs["trajectory_path"], outputs["diagnostics_path"], spectrum_path,
                     doc)


def parse_config(text: str) -> RunConfig:
    """Parse YAML ``text`` into a validated :class:`RunConfig`."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed YAML: {exc}", "config") from None
    return validate_config(doc)


SWEEP_AXES = ("r", "gamma0", "nbar", "dim")


def with_axis_value(doc: dict, axis: str, value) -> dict:
    """Copy of ``doc`` with one scalar field replaced."""
    doc = copy.deepcopy(doc)
    if axis == "r":
        doc["squeeze"]["r"] = value
    elif axis == "dim":
        doc["dim"] = value
    elif axis == "gamma0":
        if "gamma0" not in doc["gamma_profile"]:
            raise ConfigError(f"{doc['gamma_profile'].get('kind')} profile has no gamma0",
                              "gamma_profile")
        doc["gamma_profile"]["gamma0"] = value
    elif axis == "nbar":
        if doc["initial_state"].get("kind") != "thermal":
            raise ConfigError("nbar axis needs a thermal initial state", "initial_state")
        doc["initial_state"]["nbar"] = value
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {list(SWEEP_AXES)}",
                          "axis")
    return doc
