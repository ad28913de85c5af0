"""Small dense symmetric / SPD matrix calculus (g <= 8).

Symmetric matrices are plain ``numpy`` float arrays.  The helpers here check
and symmetrize inputs, factor ``Y = L D L^t``, and evaluate spectral functions
(sqrt, inverse sqrt, log, exp) through an eigendecomposition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import AsymmetricInput, DimensionMismatch, NoConvergence, NotPositiveDefinite

SYM_TOL = 1e-10
PD_TOL = 1e-12
REL_TOL = 1e-10
# multiplicative slack applied when checking certified inequalities
SAFETY = 1.0 + 1e-6


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    A = np.array(M, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")
    return A


def as_sym(M, tol: float = SYM_TOL, name: str = "matrix") -> np.ndarray:
    """Return ``(M + M^t)/2`` after checking that the asymmetry is within ``tol``.

    The tolerance is relative to ``max(1, ||M||_F)``.
    """
    A = as_matrix(M, name)
    scale = max(1.0, float(np.linalg.norm(A)))
    if np.linalg.norm(A - A.T) > tol * scale:
        raise AsymmetricInput(f"{name} is not symmetric (tol {tol:g})")
    return 0.5 * (A + A.T)


def as_spd(M, tol: float = SYM_TOL, name: str = "matrix") -> np.ndarray:
    A = as_sym(M, tol, name)
    w = np.linalg.eigvalsh(A)
    if w[0] <= PD_TOL * max(abs(w[-1]), np.finfo(float).tiny):
        raise NotPositiveDefinite(f"{name} is not positive definite (lambda_min={w[0]:.3e})")
    return A


def is_spd(M) -> bool:
    try:
        as_spd(M)
    except (NotPositiveDefinite, AsymmetricInput, DimensionMismatch):
        return False
    return True


def sym(M: np.ndarray) -> np.ndarray:
    """Unchecked symmetrization."""
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class JacobiDecomp:
    """``Y = L diag(d) L^t`` with ``L`` unit lower-triangular."""

    L: np.ndarray
    d: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.L * self.d) @ self.L.T


def jacobi_decompose(Y) -> JacobiDecomp:
    """LDL^t factorization without pivoting.

    The first pivot is ``Y[0, 0]`` exactly.  Raises ``NotPositiveDefinite`` when a
    pivot falls below ``PD_TOL * ||Y||_op``.
    """
    A = as_sym(Y, name="Y")
    g = A.shape[0]
    floor = PD_TOL * max(float(np.abs(np.linalg.eigvalsh(A)).max()), np.finfo(float).tiny)
    L = np.eye(g)
    d = np.zeros(g)
    for j in range(g):
        d[j] = A[j, j] - np.dot(L[j, :j] ** 2, d[:j])
        if not d[j] > floor:
            raise NotPositiveDefinite(f"pivot {j} = {d[j]:.3e} is not positive")
        for i in range(j + 1, g):
            L[i, j] = (A[i, j] - np.dot(L[i, :j] * L[j, :j], d[:j])) / d[j]
    return JacobiDecomp(L, d)


def jacobi_eigh(P, tol: float = 1e-14, max_sweeps: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi rotation eigensolver for a symmetric matrix.

    Stops once the off-diagonal Frobenius mass drops below ``tol * ||P||_F``.
    Returns ascending eigenvalues and the matching orthonormal eigenvectors
    (columns).
    """
    A = as_sym(P)
    n = A.shape[0]
    V = np.eye(n)
    target = tol * max(float(np.linalg.norm(A)), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off < target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                R = np.eye(n)
                R[p, p] = R[q, q] = c
                R[p, q] = s
                R[q, p] = -s
                A = R.T @ A @ R
                V = V @ R
    else:
        raise NoConvergence("Jacobi eigensolver did not converge")
    w = np.diag(A).copy()
    order = np.argsort(w)
    return w[order], V[:, order]


def eigh(P) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric eigendecomposition (LAPACK), ascending eigenvalues."""
    return np.linalg.eigh(sym(np.asarray(P, dtype=float)))


def _spd_eigh(P) -> tuple[np.ndarray, np.ndarray]:
    w, V = eigh(as_spd(P))
    return w, V


def _apply(w: np.ndarray, V: np.ndarray, f) -> np.ndarray:
    return sym((V * f(w)) @ V.T)


def sqrtm(P) -> np.ndarray:
    w, V = _spd_eigh(P)
    return _apply(w, V, np.sqrt)


def invsqrtm(P) -> np.ndarray:
    w, V = _spd_eigh(P)
    return _apply(w, V, lambda x: 1.0 / np.sqrt(x))


def logm(P) -> np.ndarray:
    w, V = _spd_eigh(P)
    return _apply(w, V, np.log)


def expm_sym(S) -> np.ndarray:
    w, V = eigh(as_sym(S))
    return _apply(w, V, np.exp)


Kind = Literal["sqrt", "invsqrt", "log", "exp-of-sym"]

_CALCULUS = {"sqrt": sqrtm, "invsqrt": invsqrtm, "log": logm, "exp-of-sym": expm_sym}


def spd_calculus(P, kind: Kind) -> np.ndarray:
    try:
        fn = _CALCULUS[kind]
    except KeyError:
        raise ValueError(f"unknown kind {kind!r}; expected one of {sorted(_CALCULUS)}") from None
    return fn(P)


@dataclass(frozen=True)
class SpectralStats:
    lambda_min: float
    op_norm: float
    frob_norm: float
    eigenvalues: np.ndarray


def spectral_stats(P) -> SpectralStats:
    A = as_sym(P)
    w = np.linalg.eigvalsh(A)
    return SpectralStats(
        lambda_min=float(w[0]),
        op_norm=float(np.abs(w).max()),
        frob_norm=float(np.linalg.norm(A)),
        eigenvalues=w,
    )


def lambda_min(P) -> float:
    return float(np.linalg.eigvalsh(sym(np.asarray(P, dtype=float)))[0])


def op_norm(M) -> float:
    """Spectral norm (largest singular value) of a possibly rectangular matrix."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def certified_le(value: float, bound: float) -> bool:
    """``value <= bound`` up to the multiplicative floating-point safety factor."""
    return value <= bound * SAFETY + 1e-300


def matrix_to_json(M) -> dict:
    A = np.asarray(M, dtype=float)
    return {"dim": int(A.shape[0]), "rows": A.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    A = as_matrix(obj["rows"])
    if A.shape[0] != int(obj["dim"]):
        raise DimensionMismatch(f"declared dim {obj['dim']} but rows give {A.shape[0]}")
    return A
