"""Observables and state distances.

Quadratures use ``X_phi = (a e^{-i phi} + a_dag e^{i phi}) / 2``, so the
vacuum variance is 1/4 and a minimum-uncertainty state has
``V_min V_max = 1/16``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidDimensionError, InvalidStateError
from .fock import DEFAULT_LEAKAGE_TOL, POSITIVITY_TOL, make_ladder
from .liouvillian import Trajectory

CLIP_TOL = 1e-12
CONVERGED_TOL = 1e-8
FIT_FLOOR = 1e-10


@dataclass(frozen=True)
class QuadratureReport:
    probe_angles: np.ndarray
    variances: np.ndarray
    min_variance: float
    max_variance: float
    principal_angle: float  # angle of the squeezed (minimum-variance) quadrature, in [0, pi)


def quadrature_moments(rho: np.ndarray) -> tuple[complex, complex, float]:
    """``(<a>, <a^2>, <a_dag a>)`` by direct matrix expectation."""
    a, _, n = make_ladder(rho.shape[0])
    return np.trace(rho @ a), np.trace(rho @ a @ a), float(np.real(np.trace(rho @ n)))


def quadrature_variances(rho: np.ndarray, probe_angles=()) -> QuadratureReport:
    """Variance of ``X_phi`` at each probe angle plus the principal variances.

    The principal axes come from diagonalizing the symmetrized 2x2
    covariance matrix of ``(X_0, X_{pi/2})``; which axis is squeezed is read
    off the eigenvector, not assumed.
    """
    mean_a, mean_a2, n = quadrature_moments(rho)
    # <X_phi^2> - <X_phi>^2 = (2 Re(c e^{-2i phi}) + 2 v + 1) / 4 with
    # c = <a^2> - <a>^2 and v = <a_dag a> - |<a>|^2; uses a a_dag = a_dag a + 1
    c = mean_a2 - mean_a**2
    v = n - abs(mean_a) ** 2
    cov = 0.25 * np.array(
        [[2 * c.real + 2 * v + 1, 2 * c.imag], [2 * c.imag, -2 * c.real + 2 * v + 1]]
    )
    evals, evecs = np.linalg.eigh(cov)
    vec = evecs[:, 0]
    principal = math.atan2(vec[1], vec[0]) % math.pi
    phi = np.asarray(probe_angles, dtype=float)
    var = 0.25 * (2 * np.real(c * np.exp(-2j * phi)) + 2 * v + 1)
    return QuadratureReport(phi, var, float(evals[0]), float(evals[1]), float(principal))


def _check_pair(rho, sigma):
    if rho.shape != sigma.shape:
        raise InvalidDimensionError(f"state shapes differ: {rho.shape} vs {sigma.shape}")


def _psd_eig(rho, name):
    lam, vec = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    if lam[0] <= -POSITIVITY_TOL:
        raise InvalidStateError(f"{name} has negative eigenvalue {lam[0]:.3e}")
    clipped = float(-lam[lam < 0].sum())
    return np.clip(lam, 0.0, None), vec, clipped


def fidelity(rho: np.ndarray, sigma: np.ndarray, return_clipped: bool = False):
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``.

    For a pure argument this is ``<psi|other|psi>``. Eigenvalues in
    ``(-1e-10, 0)`` are clipped to zero; with ``return_clipped`` the clipped
    mass is returned as a second value.
    """
    _check_pair(rho, sigma)
    lam_r, vec_r, clip_r = _psd_eig(rho, "rho")
    lam_s, vec_s, clip_s = _psd_eig(sigma, "sigma")
    clipped = clip_r + clip_s
    if lam_s[-1] >= 1 - CLIP_TOL:
        psi = vec_s[:, -1]
        f = float(np.real(psi.conj() @ rho @ psi)) * lam_s[-1]
    elif lam_r[-1] >= 1 - CLIP_TOL:
        psi = vec_r[:, -1]
        f = float(np.real(psi.conj() @ sigma @ psi)) * lam_r[-1]
    else:
        # Tr sqrt(sqrt(rho) sigma sqrt(rho)) is the trace norm of sqrt(rho) sqrt(sigma);
        # singular values avoid square roots of roundoff-sized eigenvalues
        sqrt_rho = (vec_r * np.sqrt(lam_r)) @ vec_r.conj().T
        sqrt_sigma = (vec_s * np.sqrt(lam_s)) @ vec_s.conj().T
        f = float(np.sum(np.linalg.svd(sqrt_rho @ sqrt_sigma, compute_uv=False)) ** 2)
    f = min(max(f, 0.0), 1.0)
    return (f, clipped) if return_clipped else f


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    _check_pair(rho, sigma)
    diff = rho - sigma
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def mean_photon_number(rho: np.ndarray) -> float:
    _, _, n = make_ladder(rho.shape[0])
    return float(np.real(np.trace(rho @ n)))


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


@dataclass(frozen=True)
class ConvergenceReport:
    times: np.ndarray
    gamma_int: np.ndarray
    trace_distance_to_steady: np.ndarray
    fitted_rate: float | None  # d log(distance) / d Gamma_int; None when already converged

    def is_monotone(self, atol: float = 0.0) -> bool:
        """True when distances never increase by more than ``atol``."""
        return bool(np.all(np.diff(self.trace_distance_to_steady) <= atol))


def convergence_study(
    trajectory: Trajectory,
    params,
    leakage_tol: float = DEFAULT_LEAKAGE_TOL,
    floor: float = FIT_FLOOR,
) -> ConvergenceReport:
    """Distance to the squeezed attractor along ``trajectory`` and its decay rate.

    The rate is the least-squares slope of ``log(distance)`` against
    ``Gamma_int`` over the later half of the samples whose distance is
    above ``floor``.
    """
    # local import: analytic imports liouvillian, which diagnostics also uses
    from .analytic import asymptotic_state

    if len(trajectory) == 0:
        raise InsufficientDataError("empty trajectory")
    if trajectory.gamma_int is None:
        raise InsufficientDataError("trajectory carries no Gamma_int samples")
    steady = asymptotic_state(params, trajectory.states[0].shape[0], leakage_tol)
    dist = np.array([trace_distance(s, steady) for s in trajectory.states])
    gint = np.asarray(trajectory.gamma_int, dtype=float)
    if np.all(dist < CONVERGED_TOL):
        return ConvergenceReport(trajectory.times, gint, dist, None)
    usable = np.flatnonzero((dist > floor) & (gint > 0))
    tail = usable[len(usable) // 2:]
    if tail.size < 3 or np.ptp(gint[tail]) == 0:
        raise InsufficientDataError(
            f"only {tail.size} usable samples above distance floor {floor:.1e} for a rate fit"
        )
    slope = np.polyfit(gint[tail], np.log(dist[tail]), 1)[0]
    return ConvergenceReport(trajectory.times, gint, dist, float(slope))
