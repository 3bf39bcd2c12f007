"""Time-dependent decay-rate profiles gamma(t).

Each profile evaluates gamma(t) and its running integral
``Gamma_int(t) = int_0^t gamma``. Constant, ramp and exponential switch use
closed forms; the Gaussian pulse and tabulated profiles use adaptive
Gauss-Kronrod quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import InvalidRateError

_QUAD_OPTS = dict(epsabs=1e-14, epsrel=1e-13, limit=400)


def _nonnegative(name, value):
    if not np.isfinite(value) or value < 0:
        raise InvalidRateError(f"{name} must be finite and >= 0, got {value}")
    return float(value)


def _positive(name, value):
    if not np.isfinite(value) or value <= 0:
        raise InvalidRateError(f"{name} must be finite and > 0, got {value}")
    return float(value)


class GammaProfile:
    """Base class. Subclasses implement ``rate`` and ``integral``."""

    kind = "abstract"

    def rate(self, t: float) -> float:
        raise NotImplementedError

    def integral(self, t: float) -> float:
        raise NotImplementedError

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.rate(float(t))
        return np.array([self.rate(float(s)) for s in np.ravel(t)]).reshape(np.shape(t))

    @property
    def asymptotic_rate(self) -> float:
        """gamma(t -> infinity)."""
        raise NotImplementedError

    def breakpoints(self) -> list[float]:
        """Times where gamma(t) has a kink or is sharply peaked."""
        return []

    def max_step(self) -> float:
        """Largest integrator step that still resolves the profile's features."""
        return math.inf

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(GammaProfile):
    gamma0: float
    kind = "constant"

    def __post_init__(self):
        _nonnegative("gamma0", self.gamma0)

    def rate(self, t):
        return self.gamma0

    def integral(self, t):
        return self.gamma0 * t

    @property
    def asymptotic_rate(self):
        return self.gamma0

    def to_dict(self):
        return {"kind": self.kind, "gamma0": self.gamma0}


@dataclass(frozen=True)
class LinearRamp(GammaProfile):
    """gamma0 -> gamma1 linearly over ``[0, t_ramp]``, then held at gamma1."""

    gamma0: float
    gamma1: float
    t_ramp: float
    kind = "linear_ramp"

    def __post_init__(self):
        _nonnegative("gamma0", self.gamma0)
        _nonnegative("gamma1", self.gamma1)
        _positive("t_ramp", self.t_ramp)

    def rate(self, t):
        if t >= self.t_ramp:
            return self.gamma1
        return self.gamma0 + (self.gamma1 - self.gamma0) * t / self.t_ramp

    def integral(self, t):
        slope = (self.gamma1 - self.gamma0) / self.t_ramp
        if t <= self.t_ramp:
            return self.gamma0 * t + 0.5 * slope * t * t
        head = 0.5 * (self.gamma0 + self.gamma1) * self.t_ramp
        return head + self.gamma1 * (t - self.t_ramp)

    @property
    def asymptotic_rate(self):
        return self.gamma1

    def breakpoints(self):
        return [self.t_ramp]

    def to_dict(self):
        return {"kind": self.kind, "gamma0": self.gamma0, "gamma1": self.gamma1,
                "t_ramp": self.t_ramp}


@dataclass(frozen=True)
class ExponentialSwitch(GammaProfile):
    """Switch-on ``gamma_inf (1 - exp(-rate t))``."""

    gamma_inf: float
    switch_rate: float
    kind = "exponential_switch"

    def __post_init__(self):
        _nonnegative("gamma_inf", self.gamma_inf)
        _positive("switch_rate", self.switch_rate)

    def rate(self, t):
        return -self.gamma_inf * math.expm1(-self.switch_rate * t)

    def integral(self, t):
        k = self.switch_rate
        # t - (1 - e^{-kt})/k, written to keep precision at small kt
        x = k * t
        if x < 1e-3:
            tail = x * x / 2 - x**3 / 6 + x**4 / 24 - x**5 / 120
        else:
            tail = x + math.expm1(-x)
        return self.gamma_inf * tail / k

    @property
    def asymptotic_rate(self):
        return self.gamma_inf

    def max_step(self):
        return 1.0 / self.switch_rate

    def to_dict(self):
        return {"kind": self.kind, "gamma_inf": self.gamma_inf,
                "switch_rate": self.switch_rate}


@dataclass(frozen=True)
class GaussianPulse(GammaProfile):
    """``baseline + gamma0 exp(-(t - center)^2 / (2 width^2))``."""

    gamma0: float
    baseline: float
    center: float
    width: float
    kind = "gaussian_pulse"

    def __post_init__(self):
        _nonnegative("gamma0", self.gamma0)
        _nonnegative("baseline", self.baseline)
        _positive("width", self.width)
        if not np.isfinite(self.center):
            raise InvalidRateError(f"center must be finite, got {self.center}")

    def _bump(self, t):
        return math.exp(-0.5 * ((t - self.center) / self.width) ** 2)

    def rate(self, t):
        return self.baseline + self.gamma0 * self._bump(t)

    def integral(self, t):
        # bump is below e^-72 outside center +- 12 width
        lo = max(0.0, self.center - 12 * self.width)
        hi = min(t, self.center + 12 * self.width)
        bump = 0.0
        if hi > lo:
            pts = [self.center] if lo < self.center < hi else None
            bump, _ = quad(self._bump, lo, hi, points=pts, **_QUAD_OPTS)
        return self.baseline * t + self.gamma0 * bump

    @property
    def asymptotic_rate(self):
        return self.baseline

    def breakpoints(self):
        return [self.center] if self.center > 0 else []

    def max_step(self):
        return 0.5 * self.width

    def to_dict(self):
        return {"kind": self.kind, "gamma0": self.gamma0, "baseline": self.baseline,
                "center": self.center, "width": self.width}


@dataclass(frozen=True)
class Piecewise(GammaProfile):
    """Piecewise-linear interpolation through ``(times[i], values[i])``.

    ``times`` must start at 0 and increase strictly; gamma is held at the
    last value after the final knot.
    """

    times: tuple
    values: tuple
    kind = "piecewise"

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = tuple(float(v) for v in self.values)
        if len(times) != len(values) or len(times) < 1:
            raise InvalidRateError("piecewise table needs matching, non-empty times and values")
        if times[0] != 0.0 or any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidRateError("piecewise times must start at 0 and strictly increase")
        for v in values:
            _nonnegative("piecewise value", v)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def rate(self, t):
        return float(np.interp(t, self.times, self.values))

    def integral(self, t):
        upper = min(t, self.times[-1])
        knots = [s for s in self.times if 0 < s < upper]
        total, _ = quad(self.rate, 0.0, upper, points=knots or None, **_QUAD_OPTS)
        if t > self.times[-1]:
            total += self.values[-1] * (t - self.times[-1])
        return total

    @property
    def asymptotic_rate(self):
        return self.values[-1]

    def breakpoints(self):
        return list(self.times[1:])

    def max_step(self):
        if len(self.times) < 2:
            return math.inf
        return float(np.min(np.diff(self.times)))

    def to_dict(self):
        return {"kind": self.kind, "times": list(self.times), "values": list(self.values)}


PROFILE_KINDS = {
    cls.kind: cls for cls in (Constant, LinearRamp, ExponentialSwitch, GaussianPulse, Piecewise)
}


def profile_from_dict(data: dict) -> GammaProfile:
    """Build a profile from ``{"kind": ..., <parameters>}``."""
    data = dict(data)
    kind = data.pop("kind", None)
    if kind not in PROFILE_KINDS:
        raise InvalidRateError(f"unknown gamma profile kind {kind!r}; "
                               f"expected one of {sorted(PROFILE_KINDS)}")
    try:
        return PROFILE_KINDS[kind](**data)
    except TypeError as exc:
        raise InvalidRateError(f"bad parameters for {kind} profile: {exc}") from None
