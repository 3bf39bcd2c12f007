"""Superoperators of the squeezed-bath master equation and their numerics.

Density matrices are vectorized by column stacking, so for operators ``X, Y``

    vec(X rho Y) = (Y^T kron X) vec(rho)

and left multiplication ``X rho`` is ``kron(1, X)``, right multiplication
``rho Y`` is ``kron(Y^T, 1)``. The "right" representation a^r in the
algebraic picture acts on kets, i.e. it is *left* matrix multiplication;
a^l acts on bras, i.e. right matrix multiplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.integrate import solve_ivp

from .errors import (
    InvalidDimensionError,
    InvalidRateError,
    IntegrationDiagnosticError,
    NonUniqueSteadyStateError,
    NumericalError,
    StiffnessError,
)
from .fock import DEFAULT_LEAKAGE_TOL, _check_dim, leakage, make_ladder
from .profiles import GammaProfile

DEFAULT_ODE_TOL = 1e-9
INVARIANT_TOL = 1e-6


def vectorize(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def devectorize(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = math.isqrt(v.size)
    if v.ndim != 1 or v.size != dim * dim:
        raise InvalidDimensionError(f"vector of length {v.size} is not a vectorized {dim}x{dim} matrix")
    return v.reshape((dim, dim), order="F")


def left_multiply(X: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> X rho``."""
    return np.kron(np.eye(X.shape[0]), X)


def right_multiply(Y: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> rho Y``."""
    return np.kron(Y.T, np.eye(Y.shape[0]))


def sandwich(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> X rho Y``."""
    return np.kron(Y.T, X)


def make_hw4_superoperators(dim: int) -> dict[str, np.ndarray]:
    """Ket-side (``_r``) and bra-side (``_l``) copies of ``{a, a_dag, n}``.

    ``a_l rho = rho a`` and ``a_l_dag rho = rho a_dag``, so ``n_l`` is
    ``rho -> rho a a_dag``; with truncation its top entry is wrong, which is
    why the su(1,1) generators are built from their basis action instead.
    """
    a, a_dag, _ = make_ladder(dim)
    ops = {
        "a_r": left_multiply(a),
        "a_r_dag": left_multiply(a_dag),
        "a_l": right_multiply(a),
        "a_l_dag": right_multiply(a_dag),
    }
    ops["n_r"] = ops["a_r_dag"] @ ops["a_r"]
    ops["n_l"] = ops["a_l_dag"] @ ops["a_l"]
    return ops


def make_K_generators(dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Composite su(1,1) generators ``(K_plus, K_minus, K_zero)``.

    On ``|n><m|``: ``K_plus`` gives ``sqrt((n+1)(m+1)) |n+1><m+1|`` (dropped
    when ``n+1`` or ``m+1`` reaches ``dim``), ``K_minus`` gives
    ``sqrt(nm) |n-1><m-1|`` and ``K_zero`` multiplies by ``(n+m+1)/2``.
    """
    dim = _check_dim(dim)
    a, a_dag, _ = make_ladder(dim)
    K_plus = sandwich(a_dag, a)
    K_minus = sandwich(a, a_dag)
    n = np.arange(dim)
    # column-stacked index of |n><m| is n + dim*m
    K_zero = np.diag(((n[:, None] + n[None, :] + 1) / 2).reshape(-1, order="F")).astype(complex)
    return K_plus, K_minus, K_zero


def build_lindblad(dim: int, reservoir, gamma: float) -> np.ndarray:
    """Liouvillian of the squeezed-bath master equation at fixed ``gamma``.

    ``reservoir`` supplies the moments ``N`` and ``M``: a
    :class:`~squeezed_reservoir.fock.SqueezeParams` for the squeezed vacuum, or a
    :class:`~squeezed_reservoir.fock.ThermalReservoir` for the ordinary thermal
    bath (``M = 0``).
    """
    if not np.isfinite(gamma) or gamma < 0:
        raise InvalidRateError(f"decay rate must be >= 0, got {gamma}")
    a, a_dag, _ = make_ladder(dim)
    N, M = reservoir.N, reservoir.M

    def dissipator(X, Y):
        # 2 X rho Y - Y X rho - rho Y X
        YX = Y @ X
        return 2 * sandwich(X, Y) - left_multiply(YX) - right_multiply(YX)

    L = (N + 1) * dissipator(a, a_dag) + N * dissipator(a_dag, a)
    if M != 0:
        L = L - M * dissipator(a, a) - np.conj(M) * dissipator(a_dag, a_dag)
    return 0.5 * gamma * L


def build_rate_operator(dim: int, gamma: float) -> np.ndarray:
    """Squeezed-frame generator ``gamma (K_minus - K_zero + 1/2)``."""
    if not np.isfinite(gamma) or gamma < 0:
        raise InvalidRateError(f"decay rate must be >= 0, got {gamma}")
    _, K_minus, K_zero = make_K_generators(dim)
    return gamma * (K_minus - K_zero + 0.5 * np.eye(dim * dim))


@dataclass
class Trajectory:
    """Sampled solution: ``states[i]`` is the density matrix at ``times[i]``."""

    times: np.ndarray
    states: list
    leakage: np.ndarray
    gamma_int: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.leakage = np.asarray(self.leakage, dtype=float)
        if len(self.states) != self.times.size or self.leakage.size != self.times.size:
            raise ValueError("times, states and leakage must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return self.times.size


def _check_time_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] != 0.0:
        raise ValueError("time grid must be a non-empty 1-D list starting at 0")
    if np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return t


def _monitor(rho, t, tol, leak):
    herm = np.linalg.norm(rho - rho.conj().T, "fro")
    drift = abs(np.real(np.trace(rho)) - 1)
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if herm > INVARIANT_TOL:
        raise IntegrationDiagnosticError("Hermiticity lost", t, herm)
    if drift > INVARIANT_TOL + 10 * tol + leak:
        raise IntegrationDiagnosticError("trace drift", t, drift)
    if lam < -INVARIANT_TOL:
        raise IntegrationDiagnosticError("negative eigenvalue", t, -lam)


def integrate(
    rho0: np.ndarray,
    profile: GammaProfile,
    params,
    t_grid,
    tol: float = DEFAULT_ODE_TOL,
) -> Trajectory:
    """Integrate ``d rho/dt = gamma(t) L rho`` with an adaptive RK4(5) scheme.

    ``L`` is :func:`build_lindblad` at unit rate. The solver is restarted at
    every output time so the state can be Hermitized there; the trace is
    never renormalized.
    """
    t = _check_time_grid(t_grid)
    dim = rho0.shape[0]
    L1 = scipy.sparse.csr_matrix(build_lindblad(dim, params, 1.0))

    def rhs(s, v):
        return profile.rate(s) * (L1 @ v)

    max_step = profile.max_step()
    kinks = sorted(b for b in profile.breakpoints() if 0 < b < t[-1])
    v = vectorize(rho0).astype(complex)
    rho = devectorize(v, dim)
    states = [rho.copy()]
    leaks = [leakage(rho)]
    for t0, t1 in zip(t[:-1], t[1:]):
        # split at kinks so the error controller never straddles one
        stops = [t0] + [b for b in kinks if t0 < b < t1] + [t1]
        for s0, s1 in zip(stops[:-1], stops[1:]):
            sol = solve_ivp(rhs, (s0, s1), v, method="RK45", rtol=tol, atol=tol * 1e-3,
                            max_step=max_step)
            if sol.status != 0:
                raise StiffnessError(
                    f"integration failed at t={sol.t[-1]:.6g}: {sol.message}; "
                    "try a larger dim or a smoother gamma profile"
                )
            v = sol.y[:, -1]
        rho = devectorize(v, dim)
        rho = 0.5 * (rho + rho.conj().T)
        v = vectorize(rho).copy()
        leak = leakage(rho)
        _monitor(rho, t1, tol, leak)
        states.append(rho.copy())
        leaks.append(leak)
    gamma_int = np.array([profile.integral(s) for s in t])
    return Trajectory(t, states, np.array(leaks), gamma_int, {"method": "numeric", "tol": tol})


def steady_state_numeric(L: np.ndarray, degeneracy_tol: float = 1e-8) -> np.ndarray:
    """Unit-trace Hermitian null vector of ``L`` from a dense SVD.

    Raises :class:`NonUniqueSteadyStateError` when the second-smallest
    singular value is below ``degeneracy_tol * ||L||``.
    """
    L = np.asarray(L)
    dim = math.isqrt(L.shape[0])
    try:
        _, svals, vh = scipy.linalg.svd(L, lapack_driver="gesdd")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"SVD of the Liouvillian failed: {exc}") from exc
    scale = svals[0]
    if svals[-2] <= degeneracy_tol * scale:
        raise NonUniqueSteadyStateError(
            f"kernel is at least two-dimensional (singular values {svals[-1]:.2e}, "
            f"{svals[-2]:.2e}, norm {scale:.2e})"
        )
    rho = devectorize(vh[-1].conj(), dim)
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


def spectrum(L: np.ndarray) -> np.ndarray:
    """All eigenvalues of ``L``, sorted by real part, largest first."""
    L = np.asarray(L)
    if not np.all(np.isfinite(L)):
        raise NumericalError("Liouvillian has non-finite entries")
    try:
        ev = scipy.linalg.eigvals(L)
    except (np.linalg.LinAlgError, ValueError) as exc:
        cond = np.linalg.cond(L)
        raise NumericalError(f"eigensolver failed (condition number {cond:.2e}): {exc}") from exc
    order = np.lexsort((-ev.imag, -ev.real))
    return ev[order]
