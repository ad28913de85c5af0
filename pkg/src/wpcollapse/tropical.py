r"""The cone of flat-torus Gram matrices with the metric
``(1/2) tr(P^{-1} dP P^{-1} dP)``.

A positive definite ``P`` encodes the flat metric ``sum p_ij dx_i dx_j`` on
``R^r / Z^r``.  Distances, geodesics and the scaling isometry live here; the
quotient by ``GL(r, Z)`` is reached through :func:`reduction.reduce_spd`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NonpositiveScale
from .linalg import as_spd, as_sym, expm_sym, invsqrtm, sqrtm, sym
from .reduction import reduce_spd


def _pair(P, V):
    P = as_spd(P, name="P")
    V = as_sym(V, name="V")
    if P.shape != V.shape:
        raise DimensionMismatch(f"P is {P.shape} but V is {V.shape}")
    return P, V


def trwp_norm_sq(P, V) -> float:
    P, V = _pair(P, V)
    A = np.linalg.solve(P, V)
    return max(0.5 * float(np.trace(A @ A)), 0.0)


def psi_chart(P, V) -> np.ndarray:
    """``P^{-1/2} V P^{-1/2}``; its squared Frobenius norm is twice the metric."""
    P, V = _pair(P, V)
    R = invsqrtm(P)
    return sym(R @ V @ R)


def relative_eigenvalues(P, Q) -> np.ndarray:
    """Eigenvalues of ``P^{-1/2} Q P^{-1/2}``, ascending.

    Computed as eigenvalues of ``C^{-1} Q C^{-t}`` with ``P = C C^t``, which
    loses less accuracy than the symmetric square root when ``P`` is ill
    conditioned."""
    P = as_spd(P, name="P")
    Q = as_spd(Q, name="Q")
    if P.shape != Q.shape:
        raise DimensionMismatch(f"P is {P.shape} but Q is {Q.shape}")
    Ci = np.linalg.inv(np.linalg.cholesky(P))
    return np.linalg.eigvalsh(sym(Ci @ Q @ Ci.T))


def trwp_distance(P, Q) -> float:
    mu = relative_eigenvalues(P, Q)
    return float(np.sqrt(0.5 * np.sum(np.log(mu) ** 2)))


def trwp_geodesic(P, V, s: float) -> np.ndarray:
    """``P^{1/2} exp(s P^{-1/2} V P^{-1/2}) P^{1/2}``."""
    P, V = _pair(P, V)
    R = sqrtm(P)
    Ri = invsqrtm(P)
    return sym(R @ expm_sym(s * sym(Ri @ V @ Ri)) @ R)


@dataclass(frozen=True)
class FlatTorusCoeffs:
    p: np.ndarray
    volume: float
    shortest_sq: float

    @property
    def shortest(self) -> float:
        return float(np.sqrt(self.shortest_sq))


def shortest_vector_sq(P, window: int = 3) -> float:
    """``min n^t P n`` over nonzero integer ``n`` with ``|n|_inf <= window``
    after LLL reduction of ``P``."""
    P = as_spd(P, name="P")
    r = P.shape[0]
    Pr = reduce_spd(P).Y if r > 1 else P
    grid = np.array(list(itertools.product(range(-window, window + 1), repeat=r)), dtype=float)
    grid = grid[np.any(grid != 0, axis=1)]
    q = np.einsum("ki,ij,kj->k", grid, Pr, grid)
    return float(q.min())


def flat_metric_coeffs(P, window: int = 3) -> FlatTorusCoeffs:
    P = as_spd(P, name="P")
    return FlatTorusCoeffs(P.copy(), float(np.sqrt(np.linalg.det(P))), shortest_vector_sq(P, window))


def normalize_basepoint(t_seq: Sequence, d_g_seq: Sequence[float]) -> list[np.ndarray]:
    """Divide each ``t_n`` by ``d_g(tau_n)``; an isometry of the cone."""
    if len(t_seq) != len(d_g_seq):
        raise DimensionMismatch("t and d_g sequences differ in length")
    out = []
    for t, c in zip(t_seq, d_g_seq):
        if not c > 0:
            raise NonpositiveScale(f"scale must be positive, got {c}")
        out.append(as_spd(t, name="t") / float(c))
    return out


def spd_to_json(P) -> dict:
    P = np.asarray(P, dtype=float)
    return {"r": int(P.shape[0]), "P": P.tolist()}


def spd_from_json(obj: dict) -> np.ndarray:
    P = as_spd(np.array(obj["P"], dtype=float).reshape(-1, int(obj["r"])), name="P")
    if P.shape[0] != int(obj["r"]):
        raise DimensionMismatch(f"declared r={obj['r']} but P has size {P.shape[0]}")
    return P
