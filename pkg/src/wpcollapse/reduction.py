"""Siegel reduction theory: Jacobi coordinates, Siegel-set membership and
lattice reduction of Gram matrices.

Siegel sets are cut out by ``|x_ij| < u``, ``|l_ij| < u``, ``1 < u d_1`` and
``d_i < u d_{i+1}``, where ``Y = L diag(d) L^t`` is the Jacobi decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import NoConvergence, UnimodularOverflow, ValidationError
from .linalg import as_spd, jacobi_decompose, sym
from .siegel import SiegelPoint, SymplecticMat, act

DEFAULT_U = 2.0
LLL_DELTA = 0.75
MAX_SWAPS = 100_000
# integer entries are kept well inside int64 and float64-exact range
_INT_LIMIT = 2**53


@dataclass(frozen=True)
class SiegelCoords:
    """``X`` as is, plus the Jacobi data ``L`` (unit lower-triangular) and ``d``."""

    X: np.ndarray
    L: np.ndarray
    d: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return self.X[np.triu_indices(len(self.d))]

    @property
    def l(self) -> np.ndarray:
        return self.L[np.tril_indices(len(self.d), -1)]

    def to_point(self) -> SiegelPoint:
        return SiegelPoint(self.X, (self.L * self.d) @ self.L.T)


def siegel_coords(tau: SiegelPoint) -> SiegelCoords:
    jd = jacobi_decompose(tau.Y)
    return SiegelCoords(tau.X.copy(), jd.L, jd.d)


def _chain_ok(d: np.ndarray, u: float) -> bool:
    return bool(np.all(d[:-1] < u * d[1:]))


def _check_u(u: float):
    if not u > 1:
        raise ValidationError(f"Siegel parameter u must exceed 1, got {u}")


def siegel_set_clauses(L: np.ndarray, d: np.ndarray, u: float) -> dict[str, bool]:
    """Truth value of each Siegel-set inequality family except the ``x`` bound."""
    l = L[np.tril_indices(len(d), -1)]
    return {
        "l_bound": bool(np.all(np.abs(l) < u)),
        "scale": bool(1.0 < u * d[0]),
        "d_chain": _chain_ok(d, u),
    }


def in_siegel_set(tau: SiegelPoint, u: float = DEFAULT_U) -> bool:
    _check_u(u)
    c = siegel_coords(tau)
    clauses = siegel_set_clauses(c.L, c.d, u)
    return bool(np.all(np.abs(tau.X) < u)) and all(clauses.values())


def in_siegel_set_spd(Y, u: float = DEFAULT_U) -> bool:
    _check_u(u)
    jd = jacobi_decompose(Y)
    return all(siegel_set_clauses(jd.L, jd.d, u).values())


def deep_neighborhood(tau: SiegelPoint, gprime: int, r: float, u: float = DEFAULT_U) -> bool:
    """``tau`` lies in the Siegel set and ``d_{g'+1}(tau) > r``."""
    if not 0 <= gprime < tau.g:
        raise ValidationError(f"need 0 <= g' < g, got g'={gprime}, g={tau.g}")
    if not in_siegel_set(tau, u):
        return False
    return bool(siegel_coords(tau).d[gprime] > r)


class SPDReduction(NamedTuple):
    Y: np.ndarray
    U: np.ndarray
    # the "1 < u d_1" clause; conjugation cannot enforce it, so it is only reported
    scale_ok: bool


def _checked(U: np.ndarray) -> np.ndarray:
    if np.abs(U).max() >= _INT_LIMIT:
        raise UnimodularOverflow("unimodular transform entries exceed 2**53")
    return U


def reduce_spd(Y, u: float = DEFAULT_U, delta: float = LLL_DELTA, max_swaps: int = MAX_SWAPS) -> SPDReduction:
    """LLL reduction of a Gram matrix.

    Returns ``Y_red = U^t Y U`` with ``U`` integral unimodular such that
    ``|l_ij(Y_red)| <= 1/2`` and the Lovasz condition holds, which for
    ``delta = 3/4`` gives ``d_i <= 2 d_{i+1}``.
    """
    Y = as_spd(Y, name="Y")
    if u < 2:
        raise ValidationError("LLL reduction only guarantees the Siegel chain for u >= 2")
    g = Y.shape[0]
    U = np.eye(g, dtype=np.int64)
    tie = 1e-12

    def gram():
        Uf = U.astype(float)
        return sym(Uf.T @ Y @ Uf)

    swaps = 0
    k = 1
    while k < g:
        # size-reduce column k against columns k-1, ..., 0
        for j in range(k - 1, -1, -1):
            jd = jacobi_decompose(gram())
            mu = jd.L[k, j]
            if abs(mu) > 0.5 + tie:
                q = int(np.rint(mu))
                U[:, k] = _checked(U[:, k] - q * U[:, j])
        jd = jacobi_decompose(gram())
        mu = jd.L[k, k - 1]
        if jd.d[k] < (delta - mu * mu) * jd.d[k - 1] * (1.0 - tie):
            U[:, [k - 1, k]] = U[:, [k, k - 1]]
            swaps += 1
            if swaps > max_swaps:
                raise NoConvergence(f"LLL exceeded {max_swaps} swaps")
            k = max(k - 1, 1)
        else:
            k += 1
    if g == 1:
        U = np.ones((1, 1), dtype=np.int64)
    Yr = gram()
    d0 = jacobi_decompose(Yr).d[0]
    return SPDReduction(Yr, U, bool(1.0 < u * d0))


def reduce_sl2(tau: SiegelPoint, max_steps: int = 10_000) -> tuple[SiegelPoint, SymplecticMat]:
    """Move a point of the upper half-plane into the standard fundamental domain.

    Alternates translation ``x -> x - round(x)`` and inversion ``tau -> -1/tau``.
    Returns the reduced point and the integral matrix ``M`` with
    ``act(M, tau) = tau_red``.
    """
    if tau.g != 1:
        raise ValidationError("reduce_sl2 needs g = 1")
    z = complex(tau.X[0, 0], tau.Y[0, 0])
    a, b, c, d = 1, 0, 0, 1
    for _ in range(max_steps):
        n = int(np.floor(z.real + 0.5))
        if n:
            z -= n
            a, b = a - n * c, b - n * d
        if abs(z) < 1.0 - 1e-12:
            z = -1.0 / z
            a, b, c, d = -c, -d, a, b
        else:
            break
    else:
        raise NoConvergence(f"SL(2,Z) reduction did not finish in {max_steps} steps")
    M = SymplecticMat([[a]], [[b]], [[c]], [[d]])
    return act(M, tau), M
