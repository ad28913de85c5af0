r"""The Siegel upper half-space and its Weil-Petersson metric.

A point is ``tau = X + iY`` with ``X`` real symmetric and ``Y`` positive
definite.  Tangent vectors are complex symmetric matrices ``V = VX + i VY``.
The metric is

.. math::

    \|V\|^2_\tau = \tfrac12\left(\mathrm{tr}(Y^{-1} V_X Y^{-1} V_X)
                               + \mathrm{tr}(Y^{-1} V_Y Y^{-1} V_Y)\right),

i.e. half the classical Siegel metric, which for ``g = 1`` is
``(dx^2 + dy^2) / (2 y^2)``.  It is the Kahler metric of the potential
``-log det Y`` up to the factor 1/4 relating ``dd^c`` and the Hermitian form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NumericallySingular, SamplesTooCoarse, ValidationError
from .linalg import as_matrix, as_spd, as_sym, invsqrtm, sqrtm, sym

SYMP_TOL = 1e-10
COND_MAX = 1e12


@dataclass(frozen=True)
class SiegelPoint:
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = as_sym(self.X, name="X")
        Y = as_spd(self.Y, name="Y")
        if X.shape != Y.shape:
            raise DimensionMismatch(f"X is {X.shape} but Y is {Y.shape}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def g(self) -> int:
        return self.X.shape[0]

    @property
    def tau(self) -> np.ndarray:
        return self.X + 1j * self.Y

    @classmethod
    def from_complex(cls, tau) -> "SiegelPoint":
        T = np.array(tau, dtype=complex)
        if T.ndim == 0:
            T = T.reshape(1, 1)
        return cls(T.real, T.imag)

    @classmethod
    def identity(cls, g: int) -> "SiegelPoint":
        """The base point ``i I_g``."""
        return cls(np.zeros((g, g)), np.eye(g))

    def harish_chandra(self) -> np.ndarray:
        """Image ``(tau - iI)(tau + iI)^{-1}`` in the bounded realization."""
        I = np.eye(self.g)
        return (self.tau - 1j * I) @ np.linalg.inv(self.tau + 1j * I)

    def __eq__(self, other):
        if not isinstance(other, SiegelPoint):
            return NotImplemented
        return np.array_equal(self.X, other.X) and np.array_equal(self.Y, other.Y)

    __hash__ = None


@dataclass(frozen=True)
class TangentVec:
    VX: np.ndarray
    VY: np.ndarray

    def __post_init__(self):
        VX = as_sym(self.VX, name="VX")
        VY = as_sym(self.VY, name="VY")
        if VX.shape != VY.shape:
            raise DimensionMismatch(f"VX is {VX.shape} but VY is {VY.shape}")
        object.__setattr__(self, "VX", VX)
        object.__setattr__(self, "VY", VY)

    @property
    def g(self) -> int:
        return self.VX.shape[0]

    @property
    def complex(self) -> np.ndarray:
        return self.VX + 1j * self.VY

    @classmethod
    def from_complex(cls, V) -> "TangentVec":
        V = np.array(V, dtype=complex)
        if V.ndim == 0:
            V = V.reshape(1, 1)
        return cls(V.real, V.imag)

    @classmethod
    def zero(cls, g: int) -> "TangentVec":
        return cls(np.zeros((g, g)), np.zeros((g, g)))

    def __add__(self, other: "TangentVec") -> "TangentVec":
        return TangentVec(self.VX + other.VX, self.VY + other.VY)

    def __sub__(self, other: "TangentVec") -> "TangentVec":
        return TangentVec(self.VX - other.VX, self.VY - other.VY)

    def __mul__(self, c: float) -> "TangentVec":
        return TangentVec(c * self.VX, c * self.VY)

    __rmul__ = __mul__

    def frob_sq(self) -> float:
        return float(np.sum(self.VX**2) + np.sum(self.VY**2))

    __hash__ = None


def J_matrix(g: int) -> np.ndarray:
    I = np.eye(g)
    Z = np.zeros((g, g))
    return np.block([[Z, I], [-I, Z]])


def is_symplectic(M, tol: float = SYMP_TOL) -> bool:
    """True iff ``||M^t J M - J||_F <= tol * max(1, ||M||_F^2)``."""
    M = as_matrix(M, "M")
    n = M.shape[0]
    if n % 2:
        raise DimensionMismatch(f"symplectic matrices have even size, got {n}")
    J = J_matrix(n // 2)
    scale = max(1.0, float(np.linalg.norm(M)) ** 2)
    return bool(np.linalg.norm(M.T @ J @ M - J) <= tol * scale)


@dataclass(frozen=True)
class SymplecticMat:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        blocks = [np.array(b, dtype=float).reshape(np.shape(b) or (1, 1)) for b in (self.A, self.B, self.C, self.D)]
        shapes = {b.shape for b in blocks}
        if len(shapes) != 1 or blocks[0].ndim != 2 or blocks[0].shape[0] != blocks[0].shape[1]:
            raise DimensionMismatch(f"blocks must be equal square matrices, got {[b.shape for b in blocks]}")
        for name, b in zip("ABCD", blocks):
            object.__setattr__(self, name, b)
        if not is_symplectic(self.matrix):
            raise ValidationError("matrix is not symplectic")

    @property
    def g(self) -> int:
        return self.A.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])

    @classmethod
    def from_matrix(cls, M) -> "SymplecticMat":
        M = as_matrix(M, "M")
        g = M.shape[0] // 2
        if 2 * g != M.shape[0]:
            raise DimensionMismatch(f"symplectic matrices have even size, got {M.shape[0]}")
        return cls(M[:g, :g], M[:g, g:], M[g:, :g], M[g:, g:])

    @classmethod
    def identity(cls, g: int) -> "SymplecticMat":
        I, Z = np.eye(g), np.zeros((g, g))
        return cls(I, Z, Z, I)

    @classmethod
    def translation(cls, S) -> "SymplecticMat":
        """``tau -> tau + S`` for real symmetric ``S``."""
        S = as_sym(S)
        g = S.shape[0]
        return cls(np.eye(g), S, np.zeros((g, g)), np.eye(g))

    @classmethod
    def congruence(cls, A) -> "SymplecticMat":
        """``tau -> A tau A^t`` for invertible ``A``."""
        A = as_matrix(A)
        g = A.shape[0]
        return cls(A, np.zeros((g, g)), np.zeros((g, g)), np.linalg.inv(A).T)

    @classmethod
    def frame(cls, tau: SiegelPoint) -> "SymplecticMat":
        """The affine map ``w -> Y^{1/2} w Y^{1/2} + X`` sending ``iI`` to ``tau``."""
        R = sqrtm(tau.Y)
        Ri = invsqrtm(tau.Y)
        g = tau.g
        return cls(R, tau.X @ Ri, np.zeros((g, g)), Ri)

    def __matmul__(self, other: "SymplecticMat") -> "SymplecticMat":
        return SymplecticMat.from_matrix(self.matrix @ other.matrix)

    def inverse(self) -> "SymplecticMat":
        # M^{-1} = -J M^t J
        return SymplecticMat(self.D.T, -self.B.T, -self.C.T, self.A.T)

    __hash__ = None


def _denominator(M: SymplecticMat, tau: SiegelPoint) -> np.ndarray:
    if M.g != tau.g:
        raise DimensionMismatch(f"M acts on g={M.g}, point has g={tau.g}")
    Q = M.C @ tau.tau + M.D
    if np.linalg.cond(Q) > COND_MAX:
        raise NumericallySingular("C tau + D is numerically singular")
    return Q


def act(M: SymplecticMat, tau: SiegelPoint) -> SiegelPoint:
    """Generalized Mobius action ``(A tau + B)(C tau + D)^{-1}``."""
    Q = _denominator(M, tau)
    Qi = np.linalg.inv(Q)
    T = (M.A @ tau.tau + M.B) @ Qi
    # Im(M tau) = (C taubar + D)^{-t} Y (C tau + D)^{-1} avoids cancellation
    Y = (Qi.conj().T @ tau.Y @ Qi).real
    return SiegelPoint(sym(T.real), sym(Y))


def push_forward(M: SymplecticMat, tau: SiegelPoint, V: TangentVec) -> TangentVec:
    """Differential of :func:`act`: ``V -> (C tau + D)^{-t} V (C tau + D)^{-1}``."""
    Qi = np.linalg.inv(_denominator(M, tau))
    W = Qi.T @ V.complex @ Qi
    W = 0.5 * (W + W.T)
    return TangentVec(W.real, W.imag)


def _check_dims(tau: SiegelPoint, V: TangentVec):
    if tau.g != V.g:
        raise DimensionMismatch(f"tangent of size {V.g} at a point of size {tau.g}")


def _whiten(Y: np.ndarray, *Ms: np.ndarray) -> list[np.ndarray]:
    """``C^{-1} M C^{-t}`` for ``Y = C C^t``; the metric becomes a sum of
    squares, which avoids cancellation when ``Y`` is ill conditioned."""
    Ci = np.linalg.inv(np.linalg.cholesky(Y))
    return [Ci @ M @ Ci.T for M in Ms]


def wp_inner(tau: SiegelPoint, V: TangentVec, W: TangentVec) -> float:
    _check_dims(tau, V)
    _check_dims(tau, W)
    VX, VY, WX, WY = _whiten(tau.Y, V.VX, V.VY, W.VX, W.VY)
    return 0.5 * float(np.sum(VX * WX) + np.sum(VY * WY))


def wp_norm_sq(tau: SiegelPoint, V: TangentVec) -> float:
    _check_dims(tau, V)
    return wp_norm_sq_arrays(tau.Y, V.VX, V.VY)


def wp_norm_sq_arrays(Y: np.ndarray, VX: np.ndarray, VY: np.ndarray) -> float:
    """Array-level :func:`wp_norm_sq` for hot loops (no validation)."""
    A, B = _whiten(Y, VX, VY)
    return 0.5 * float(np.sum(A * A) + np.sum(B * B))


# -- Kahler potential -------------------------------------------------------


def _sym_basis(g: int) -> list[tuple[int, int, np.ndarray]]:
    out = []
    for i in range(g):
        for j in range(i, g):
            E = np.zeros((g, g))
            E[i, j] = E[j, i] = 1.0
            out.append((i, j, E))
    return out


def wp_coefficients(tau: SiegelPoint) -> np.ndarray:
    """Hermitian coefficients ``h_ab`` of ``omega = i sum h_ab dtau_a ^ dtaubar_b``.

    Coordinates are the upper-triangular entries ``tau_ij, i <= j``; the value
    is ``tr(Y^{-1} E_a Y^{-1} E_b) / 4``.
    """
    Yi = np.linalg.inv(tau.Y)
    basis = [E for _, _, E in _sym_basis(tau.g)]
    n = len(basis)
    H = np.empty((n, n))
    for a in range(n):
        for b in range(n):
            H[a, b] = 0.25 * np.trace(Yi @ basis[a] @ Yi @ basis[b])
    return H


def kahler_potential(tau: SiegelPoint) -> float:
    """``K = -log det Y``; the fibre volume is ``2^g det Y``."""
    sign, logdet = np.linalg.slogdet(tau.Y)
    return -float(logdet)


def potential_hessian(tau: SiegelPoint, h: float | None = None) -> np.ndarray:
    """Complex Hessian ``d^2 K / dtau_a dtaubar_b`` by central differences.

    Uses the Wirtinger form
    ``1/4 [(K_{x_a x_b} + K_{y_a y_b}) + i (K_{x_a y_b} - K_{y_a x_b})]``.
    """
    g = tau.g
    if h is None:
        # truncation and rounding errors both scale like (h / lambda_min)^2
        h = 1e-4 * float(np.linalg.eigvalsh(tau.Y)[0])
    basis = [E for _, _, E in _sym_basis(g)]
    n = len(basis)
    # real coordinates: x_0..x_{n-1}, y_0..y_{n-1}
    dirs = [(E, np.zeros((g, g))) for E in basis] + [(np.zeros((g, g)), E) for E in basis]

    def K(dX, dY):
        sign, logdet = np.linalg.slogdet(tau.Y + dY)
        if sign <= 0:
            raise NumericallySingular("finite-difference step left the Siegel space")
        return -logdet

    m = 2 * n
    D2 = np.empty((m, m))
    for a in range(m):
        for b in range(a, m):
            Xa, Ya = dirs[a]
            Xb, Yb = dirs[b]
            fpp = K(h * (Xa + Xb), h * (Ya + Yb))
            fpm = K(h * (Xa - Xb), h * (Ya - Yb))
            fmp = K(h * (-Xa + Xb), h * (-Ya + Yb))
            fmm = K(-h * (Xa + Xb), -h * (Ya + Yb))
            D2[a, b] = D2[b, a] = (fpp - fpm - fmp + fmm) / (4 * h * h)
    xx, yy = D2[:n, :n], D2[n:, n:]
    xy, yx = D2[:n, n:], D2[n:, :n]
    return 0.25 * ((xx + yy) + 1j * (xy - yx))


def potential_hessian_check(tau: SiegelPoint, h: float | None = None) -> float:
    """Sup-norm gap between the numerical complex Hessian of ``-log det Y``
    and :func:`wp_coefficients`."""
    return float(np.abs(potential_hessian(tau, h) - wp_coefficients(tau)).max())


# -- distances and lengths ----------------------------------------------------


def _normalized_cayley(tau1: SiegelPoint, tau2: SiegelPoint) -> np.ndarray:
    """Bounded-domain image of ``tau2`` after moving ``tau1`` to ``iI``."""
    Ri = invsqrtm(tau1.Y)
    W = Ri @ (tau2.tau - tau1.X) @ Ri
    I = np.eye(tau1.g)
    return (W - 1j * I) @ np.linalg.inv(W + 1j * I)


def cross_ratio_eigenvalues(tau1: SiegelPoint, tau2: SiegelPoint) -> np.ndarray:
    """Eigenvalues of ``(t1-t2)(t1-t2bar)^{-1}(t1bar-t2bar)(t1bar-t2)^{-1}``.

    Computed as squared singular values of the normalized Cayley transform,
    which is similar to the cross-ratio matrix; ascending.
    """
    if tau1.g != tau2.g:
        raise DimensionMismatch(f"points of size {tau1.g} and {tau2.g}")
    s = np.linalg.svd(_normalized_cayley(tau1, tau2), compute_uv=False)
    return np.sort(s**2)


def siegel_distance(tau1: SiegelPoint, tau2: SiegelPoint) -> float:
    r"""Geodesic distance for the metric above.

    ``(1/sqrt 2) * sqrt(sum_k log^2((1 + sqrt r_k) / (1 - sqrt r_k)))`` with
    ``r_k`` the cross-ratio eigenvalues.
    """
    if tau1.g != tau2.g:
        raise DimensionMismatch(f"points of size {tau1.g} and {tau2.g}")
    s = np.linalg.svd(_normalized_cayley(tau1, tau2), compute_uv=False)
    if np.any(s >= 1.0 - 1e-15):
        raise NumericallySingular("points too far apart for double precision")
    return float(np.sqrt(np.sum((2.0 * np.arctanh(s)) ** 2) / 2.0))


def curve_length(path: Sequence[SiegelPoint], max_segment: float = 0.1) -> float:
    """Midpoint-rule length of a sampled curve.

    Each segment contributes ``sqrt(wp_norm_sq(mid, delta))`` where ``mid`` is
    the coordinate midpoint and ``delta`` the coordinate increment.  Raises
    ``SamplesTooCoarse`` when a segment exceeds ``max_segment``.
    """
    if len(path) < 2:
        raise ValidationError("a curve needs at least two samples")
    total = 0.0
    for p, q in zip(path[:-1], path[1:]):
        if p.g != q.g:
            raise DimensionMismatch("curve samples have different sizes")
        Ym = 0.5 * (p.Y + q.Y)
        seg = np.sqrt(max(wp_norm_sq_arrays(Ym, q.X - p.X, q.Y - p.Y), 0.0))
        if seg > max_segment:
            raise SamplesTooCoarse(f"segment of length {seg:.3g} exceeds {max_segment}")
        total += seg
    return float(total)


def point_to_json(tau: SiegelPoint) -> dict:
    return {"g": tau.g, "X": tau.X.tolist(), "Y": tau.Y.tolist()}


def point_from_json(obj: dict) -> SiegelPoint:
    tau = SiegelPoint(np.array(obj["X"], dtype=float).reshape(-1, int(obj["g"])),
                      np.array(obj["Y"], dtype=float).reshape(-1, int(obj["g"])))
    if tau.g != int(obj["g"]):
        raise DimensionMismatch(f"declared g={obj['g']} but matrices have size {tau.g}")
    return tau


def symplectic_to_json(M: SymplecticMat) -> dict:
    return {"g": M.g, "A": M.A.tolist(), "B": M.B.tolist(), "C": M.C.tolist(), "D": M.D.tolist()}


def symplectic_from_json(obj: dict) -> SymplecticMat:
    g = int(obj["g"])
    blocks = [np.array(obj[k], dtype=float).reshape(g, g) for k in "ABCD"]
    return SymplecticMat(*blocks)


__all__ = [
    "SiegelPoint",
    "TangentVec",
    "SymplecticMat",
    "J_matrix",
    "is_symplectic",
    "act",
    "push_forward",
    "wp_inner",
    "wp_norm_sq",
    "wp_coefficients",
    "kahler_potential",
    "potential_hessian",
    "potential_hessian_check",
    "cross_ratio_eigenvalues",
    "siegel_distance",
    "curve_length",
    "point_to_json",
    "point_from_json",
    "symplectic_to_json",
    "symplectic_from_json",
    "sym",
]
