"""Exact solution of the squeezed-bath master equation via su(1,1).

In the squeezed frame ``rho_s = S rho S_dag`` the dynamics is pure damping,
``d rho_s/dt = gamma(t) (K_minus - K_zero + 1/2) rho_s``. The gauge
transformation ``exp(alpha(t) K_minus)`` with ``d alpha/dt = gamma (alpha + 1)``,
``alpha(0) = 0`` diagonalizes it, giving

    rho_s(t) = sum_{n,m} C_nm exp(-(n+m) Gamma_int / 2) exp(alpha K_minus) |n><m|

with ``Gamma_int = int_0^t gamma`` and ``alpha = exp(Gamma_int) - 1``.

alpha overflows long before the physical coefficients stop being O(1), so
the propagator works with ``y = 1 - exp(-Gamma_int)`` and ``Gamma_int``:
the series term that moves ``|n><m|`` down by ``k`` steps has weight

    y^k exp(-((n+m)/2 - k) Gamma_int) sqrt(C(n, k) C(m, k))

where every factor except the binomials is at most 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .fock import (
    DEFAULT_LEAKAGE_TOL,
    SqueezeParams,
    leakage,
    make_squeeze_operator,
    squeezed_vacuum_state,
)
from .liouvillian import Trajectory, _check_time_grid
from .profiles import GammaProfile

# exp(x) overflows a double just above x = 709.78
_ALPHA_OVERFLOW = 709.0


@dataclass(frozen=True)
class GaugeSample:
    """Gauge functions at one time.

    ``alpha`` is ``inf`` (and ``saturated`` is True) once ``exp(gamma_int)``
    no longer fits in a double; ``y`` and ``gamma_int`` stay exact.
    """

    t: float
    gamma_int: float
    alpha: float
    y: float
    saturated: bool = False


def solve_gauge(profile: GammaProfile, t: float) -> GaugeSample:
    """Solve the gauge condition ``d alpha/dt = gamma (alpha + 1)``, ``alpha(0) = 0``."""
    if not t >= 0:
        raise ValueError(f"time must be >= 0, got {t}")
    g = float(profile.integral(t)) if t > 0 else 0.0
    y = -math.expm1(-g)
    if g > _ALPHA_OVERFLOW:
        return GaugeSample(t, g, math.inf, y, saturated=True)
    return GaugeSample(t, g, math.expm1(g), y)


class GaugeSolution:
    """Callable view of the gauge functions for one profile."""

    def __init__(self, profile: GammaProfile):
        self.profile = profile

    def sample(self, t: float) -> GaugeSample:
        return solve_gauge(self.profile, t)

    def gamma_int(self, t: float) -> float:
        return self.sample(t).gamma_int

    def alpha(self, t: float) -> float:
        return self.sample(t).alpha

    def y(self, t: float) -> float:
        return self.sample(t).y


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def apply_exp_Kminus(sample: GaugeSample, rho_s: np.ndarray) -> np.ndarray:
    """Apply ``exp(-(n+m) Gamma_int/2) exp(alpha K_minus)`` to each ``|n><m|``.

    This is the full squeezed-frame propagator from 0 to ``sample.t``. The
    series for ``|n><m|`` stops at ``k = min(n, m)``.
    """
    rho_s = np.asarray(rho_s, dtype=complex)
    dim = rho_s.shape[0]
    g, y = sample.gamma_int, sample.y
    idx = np.arange(dim)
    # damping of the *target* element (n', m'): exp(-(n'+m') g / 2)
    log_damp = -0.5 * g * (idx[:, None] + idx[None, :])
    out = np.exp(log_damp) * rho_s
    if y == 0.0:
        return out
    log_y = math.log(y)
    for k in range(1, dim):
        tgt = idx[: dim - k]
        log_w = (
            k * log_y
            + log_damp[: dim - k, : dim - k]
            + 0.5 * (_log_binom(tgt + k, k)[:, None] + _log_binom(tgt + k, k)[None, :])
        )
        out[: dim - k, : dim - k] += np.exp(log_w) * rho_s[k:, k:]
    return out


def _to_squeezed_frame(rho, S):
    return S @ rho @ S.conj().T


def _to_lab_frame(rho_s, S):
    return S.conj().T @ rho_s @ S


def analytic_propagate(
    rho0: np.ndarray, profile: GammaProfile, params: SqueezeParams, t: float
) -> np.ndarray:
    """Exact ``rho(t)`` for initial state ``rho0``.

    The squeezed-frame coefficients ``C_nm`` are the matrix elements of
    ``S rho0 S_dag``.
    """
    S = make_squeeze_operator(rho0.shape[0], params)
    rho_s = apply_exp_Kminus(solve_gauge(profile, t), _to_squeezed_frame(rho0, S))
    return _to_lab_frame(rho_s, S)


def analytic_trajectory(
    rho0: np.ndarray, profile: GammaProfile, params: SqueezeParams, t_grid
) -> Trajectory:
    """:func:`analytic_propagate` sampled on ``t_grid`` as a :class:`Trajectory`."""
    t = _check_time_grid(t_grid)
    S = make_squeeze_operator(rho0.shape[0], params)
    rho_s0 = _to_squeezed_frame(rho0, S)
    states, leaks, gint = [], [], []
    for s in t:
        sample = solve_gauge(profile, s)
        rho = _to_lab_frame(apply_exp_Kminus(sample, rho_s0), S)
        rho = 0.5 * (rho + rho.conj().T)
        states.append(rho)
        leaks.append(leakage(rho))
        gint.append(sample.gamma_int)
    return Trajectory(t, states, np.array(leaks), np.array(gint), {"method": "analytic"})


def component_rho_nm(
    n: int,
    m: int,
    profile: GammaProfile,
    params: SqueezeParams,
    t: float,
    dim: int,
    lab_frame: bool = True,
) -> np.ndarray:
    """Time-dependent image of ``|n><m|`` (unit coefficient) by the explicit q-sum.

    Evaluates ``y^((n+m)/2) sum_q alpha^(-q) sqrt(n!/(q+d)! m!/(q-d)!) / ((n+m)/2-q)!
    |q+d><q-d|`` with ``d = (n-m)/2`` and ``q`` from ``|d|`` to ``(n+m)/2``,
    then conjugates by ``S_dag . S`` unless ``lab_frame`` is False.
    At ``alpha = 0`` the ``alpha^(-q)`` factor is singular and the series
    path is used instead.
    """
    if not (0 <= n < dim and 0 <= m < dim):
        raise ValueError(f"component ({n}, {m}) outside dim={dim}")
    sample = solve_gauge(profile, t)
    if sample.alpha == 0.0:
        unit = np.zeros((dim, dim), dtype=complex)
        unit[n, m] = 1.0
        out = apply_exp_Kminus(sample, unit)
    else:
        out = np.zeros((dim, dim), dtype=complex)
        y, alpha = sample.y, sample.alpha
        half = (n + m) / 2
        d = (n - m) / 2
        prefactor = y**half
        q = abs(d)
        while q <= half + 1e-9:
            row, col = round(q + d), round(q - d)
            coeff = (
                alpha ** (-q)
                * math.sqrt(math.factorial(n) / math.factorial(row)
                            * math.factorial(m) / math.factorial(col))
                / math.factorial(round(half - q))
            )
            out[row, col] += prefactor * coeff
            q += 1
    if not lab_frame:
        return out
    S = make_squeeze_operator(dim, params)
    return _to_lab_frame(out, S)


def asymptotic_state(
    params: SqueezeParams, dim: int, leakage_tol: float = DEFAULT_LEAKAGE_TOL
) -> np.ndarray:
    """The unique attractor ``S_dag |0><0| S`` reached from every initial state."""
    return squeezed_vacuum_state(dim, params, leakage_tol)

