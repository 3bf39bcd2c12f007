"""Truncated Fock-space operators and states.

Everything here is dense ``numpy`` complex arrays in the number basis
``|0>, |1>, ..., |dim-1>``. Truncated states are never renormalized: the
missing trace is reported as leakage so downstream checks can see it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.linalg import expm

from .errors import InvalidDimensionError, InvalidStateError, TruncationError

DEFAULT_LEAKAGE_TOL = 1e-8
UNITARITY_TOL = 1e-10
HERMITICITY_TOL = 1e-12
POSITIVITY_TOL = 1e-10


@dataclass(frozen=True)
class SqueezeParams:
    """Reservoir squeezing ``xi = r exp(i theta)``.

    ``N`` and ``M`` are the reservoir moments entering the master equation.
    """

    r: float
    theta: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.r) or self.r < 0:
            raise ValueError(f"squeezing magnitude r must be >= 0, got {self.r}")
        if not np.isfinite(self.theta):
            raise ValueError(f"reference phase theta must be finite, got {self.theta}")
        theta = float(self.theta) % (2 * math.pi)
        # tiny negative inputs round up to exactly 2 pi
        object.__setattr__(self, "theta", 0.0 if theta == 2 * math.pi else theta)

    @property
    def xi(self) -> complex:
        return self.r * np.exp(1j * self.theta)

    @property
    def N(self) -> float:
        return math.sinh(self.r) ** 2

    @property
    def M(self) -> complex:
        return np.exp(-1j * self.theta) * math.sinh(self.r) * math.cosh(self.r)


@dataclass(frozen=True)
class ThermalReservoir:
    """Ordinary thermal bath: ``N = nbar`` and the pair correlation ``M = 0``."""

    nbar: float

    def __post_init__(self):
        if not np.isfinite(self.nbar) or self.nbar < 0:
            raise ValueError(f"thermal occupation must be >= 0, got {self.nbar}")

    @property
    def N(self) -> float:
        return float(self.nbar)

    @property
    def M(self) -> complex:
        return 0j


def _check_dim(dim: int) -> int:
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"Fock dimension must be an integer >= 2, got {dim}")
    return int(dim)


def make_ladder(dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(a, a_dagger, n)`` truncated to ``dim`` levels."""
    dim = _check_dim(dim)
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    a_dag = a.conj().T
    return a, a_dag, a_dag @ a


def make_squeeze_operator(dim: int, params: SqueezeParams) -> np.ndarray:
    """Squeeze unitary ``S = exp[(xi* a^2 - xi a_dag^2) / 2]``.

    Built by matrix exponential of the truncated anti-Hermitian generator,
    so the result is unitary up to roundoff; the check guards against a
    failed exponential rather than against truncation itself.
    """
    a, a_dag, _ = make_ladder(dim)
    xi = params.xi
    gen = 0.5 * (np.conj(xi) * (a @ a) - xi * (a_dag @ a_dag))
    S = expm(gen)
    defect = np.linalg.norm(S @ S.conj().T - np.eye(dim), "fro")
    if not defect < UNITARITY_TOL:
        raise TruncationError(f"squeeze operator at dim={dim} is not unitary", defect)
    return S


def bogoliubov_transform(params: SqueezeParams, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Squeezed-mode operators ``A = cosh(r) a - sinh(r) e^{i theta} a_dag`` and its adjoint."""
    a, a_dag, _ = make_ladder(dim)
    c, s = math.cosh(params.r), math.sinh(params.r)
    A = c * a - s * np.exp(1j * params.theta) * a_dag
    A_dag = c * a_dag - s * np.exp(-1j * params.theta) * a
    return A, A_dag


def top_levels(dim: int) -> int:
    """Number of upper Fock levels watched by the leakage gate."""
    return math.ceil(0.1 * dim)


def leakage(rho: np.ndarray) -> float:
    """Population carried by the top ``ceil(0.1 dim)`` Fock levels."""
    k = top_levels(rho.shape[0])
    return float(np.sum(np.real(np.diag(rho)[-k:])))


def check_leakage(rho: np.ndarray, leakage_tol: float = DEFAULT_LEAKAGE_TOL) -> float:
    leak = leakage(rho)
    if leak >= leakage_tol:
        raise TruncationError(
            f"population {leak:.3e} in the top {top_levels(rho.shape[0])} levels exceeds "
            f"leakage tolerance {leakage_tol:.1e}; increase dim",
            leak,
        )
    return leak


def check_density_matrix(rho: np.ndarray, trace_tol: float = DEFAULT_LEAKAGE_TOL) -> None:
    """Raise :class:`InvalidStateError` unless ``rho`` is Hermitian, unit trace, PSD."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.linalg.norm(rho - rho.conj().T, "fro")
    if herm >= HERMITICITY_TOL:
        raise InvalidStateError(f"density matrix not Hermitian (defect {herm:.3e})")
    tr = np.real(np.trace(rho))
    if abs(tr - 1) >= trace_tol:
        raise InvalidStateError(f"trace {tr!r} deviates from 1 by more than {trace_tol:.1e}")
    lam = np.linalg.eigvalsh(rho)[0]
    if lam <= -POSITIVITY_TOL:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lam:.3e}")


def _projector(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def squeezed_vacuum_state(
    dim: int, params: SqueezeParams, leakage_tol: float = DEFAULT_LEAKAGE_TOL
) -> np.ndarray:
    """Pure state ``S_dag |0><0| S``, the attractor of the squeezed-bath dynamics."""
    S = make_squeeze_operator(dim, params)
    rho = _projector(S.conj().T[:, 0])
    check_leakage(rho, leakage_tol)
    return rho


@dataclass(frozen=True)
class InitialStateSpec:
    """Description of an initial cavity state.

    ``kind`` is one of ``fock``, ``coherent``, ``thermal``, ``squeezed_vacuum``,
    ``matrix``; ``params`` holds the variant's parameters. Use the
    classmethod constructors rather than building one by hand.
    """

    kind: str
    params: Mapping = field(default_factory=dict)

    @classmethod
    def fock(cls, n: int) -> "InitialStateSpec":
        return cls("fock", {"n": int(n)})

    @classmethod
    def coherent(cls, alpha: complex) -> "InitialStateSpec":
        return cls("coherent", {"alpha": complex(alpha)})

    @classmethod
    def thermal(cls, nbar: float) -> "InitialStateSpec":
        return cls("thermal", {"nbar": float(nbar)})

    @classmethod
    def squeezed_vacuum(cls, r: float, theta: float = 0.0) -> "InitialStateSpec":
        return cls("squeezed_vacuum", {"r": float(r), "theta": float(theta)})

    @classmethod
    def matrix(cls, coefficients) -> "InitialStateSpec":
        """``coefficients`` is a square array ``C[n, m] = <n|rho|m>`` or a
        mapping ``{(n, m): C_nm}`` with unlisted entries zero."""
        return cls("matrix", {"coefficients": coefficients})


def _coefficient_matrix(coefficients, dim: int) -> np.ndarray:
    if isinstance(coefficients, Mapping):
        C = np.zeros((dim, dim), dtype=complex)
        for (n, m), value in coefficients.items():
            if not (0 <= n < dim and 0 <= m < dim):
                raise InvalidStateError(f"coefficient index ({n}, {m}) outside dim={dim}")
            C[n, m] = value
        return C
    C = np.asarray(coefficients, dtype=complex)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] > dim:
        raise InvalidStateError(f"coefficient table of shape {C.shape} does not fit dim={dim}")
    out = np.zeros((dim, dim), dtype=complex)
    out[: C.shape[0], : C.shape[1]] = C
    return out


def density_from_spec(
    spec: InitialStateSpec, dim: int, leakage_tol: float = DEFAULT_LEAKAGE_TOL
) -> np.ndarray:
    """Build the density matrix described by ``spec`` in ``dim`` levels."""
    dim = _check_dim(dim)
    p = spec.params
    if spec.kind == "fock":
        n = p["n"]
        if not 0 <= n < dim:
            raise InvalidStateError(f"Fock state |{n}> outside dim={dim}")
        rho = np.zeros((dim, dim), dtype=complex)
        rho[n, n] = 1.0
    elif spec.kind == "coherent":
        alpha = complex(p["alpha"])
        if not np.isfinite(alpha):
            raise InvalidStateError("coherent amplitude must be finite")
        psi = np.zeros(dim, dtype=complex)
        psi[0] = np.exp(-abs(alpha) ** 2 / 2)
        for k in range(1, dim):
            psi[k] = psi[k - 1] * alpha / math.sqrt(k)
        rho = _projector(psi)
    elif spec.kind == "thermal":
        nbar = p["nbar"]
        if not np.isfinite(nbar) or nbar < 0:
            raise InvalidStateError(f"thermal occupation must be finite and >= 0, got {nbar}")
        ratio = nbar / (1 + nbar)
        rho = np.diag(ratio ** np.arange(dim) / (1 + nbar)).astype(complex)
    elif spec.kind == "squeezed_vacuum":
        params = SqueezeParams(p["r"], p.get("theta", 0.0))
        S = make_squeeze_operator(dim, params)
        rho = _projector(S.conj().T[:, 0])
    elif spec.kind == "matrix":
        rho = _coefficient_matrix(p["coefficients"], dim)
        if not np.all(np.isfinite(rho)):
            raise InvalidStateError("coefficient table has non-finite entries")
        tr = np.trace(rho)
        if abs(tr - 1) > 1e-12:
            raise InvalidStateError(f"diagonal coefficients sum to {tr}, not 1")
        if np.linalg.norm(rho - rho.conj().T, "fro") > 1e-12:
            raise InvalidStateError("coefficient table is not Hermitian")
        if np.linalg.eigvalsh(rho)[0] <= -POSITIVITY_TOL:
            raise InvalidStateError("coefficient table is not positive semidefinite")
    else:
        raise InvalidStateError(f"unknown initial state kind {spec.kind!r}")
    check_leakage(rho, leakage_tol)
    check_density_matrix(rho, trace_tol=leakage_tol)
    return rho
