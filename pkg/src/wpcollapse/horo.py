r"""Horospherical coordinates relative to the boundary component of size ``g'``.

Blocks of ``tau`` (``g = g' + g''``)::

    tau = [[tau',     tau'''],
           [tau'''^t, tau'' ]]

The projection ``pi(tau) = (tau', t)`` with the Schur complement
``t = Y'' - Y'''^t (Y')^{-1} Y'''`` is a Riemannian submersion onto the
product of the Siegel metric on ``tau'`` and the flat-torus metric on ``t``.
Fibres are parametrized by ``(X''', Y''', X'')`` with
``Y'' = t + Y'''^t (Y')^{-1} Y'''``.

Everything labelled *certified* below returns a value that is on the correct
side of the true quantity in exact arithmetic; compare with
:func:`linalg.certified_le` to absorb rounding.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BaseMismatch, DimensionMismatch, NotDeepEnough, NotInSiegelSet, NotVertical, ValidationError
from .linalg import lambda_min, op_norm, sym
from .reduction import DEFAULT_U, in_siegel_set, siegel_coords
from .siegel import SiegelPoint, TangentVec, siegel_distance, wp_inner, wp_norm_sq, wp_norm_sq_arrays
from .tropical import trwp_distance, trwp_norm_sq

# -- block bookkeeping ------------------------------------------------------


def _check_gprime(g: int, gprime: int):
    if not 0 <= gprime < g:
        raise DimensionMismatch(f"need 0 <= g' < g, got g'={gprime}, g={g}")


@dataclass(frozen=True)
class BlockSplit:
    gprime: int
    XP: np.ndarray
    YP: np.ndarray
    XPP: np.ndarray
    YPP: np.ndarray
    XPPP: np.ndarray
    YPPP: np.ndarray

    @property
    def tauP(self) -> np.ndarray:
        return self.XP + 1j * self.YP

    @property
    def tauPP(self) -> np.ndarray:
        return self.XPP + 1j * self.YPP

    @property
    def tauPPP(self) -> np.ndarray:
        return self.XPPP + 1j * self.YPPP

    def assemble(self) -> SiegelPoint:
        X = np.block([[self.XP, self.XPPP], [self.XPPP.T, self.XPP]])
        Y = np.block([[self.YP, self.YPPP], [self.YPPP.T, self.YPP]])
        return SiegelPoint(X, Y)


def split_blocks(tau: SiegelPoint, gprime: int) -> BlockSplit:
    _check_gprime(tau.g, gprime)
    k = gprime
    X, Y = tau.X, tau.Y
    return BlockSplit(k, X[:k, :k], Y[:k, :k], X[k:, k:], Y[k:, k:], X[:k, k:], Y[:k, k:])


def _split_sym(M: np.ndarray, k: int):
    return M[:k, :k], M[:k, k:], M[k:, k:]


@dataclass(frozen=True)
class BasePoint:
    """``(tau', t)``; ``tauP`` is ``None`` when ``g' = 0``."""

    tauP: Optional[SiegelPoint]
    t: np.ndarray

    @property
    def gprime(self) -> int:
        return 0 if self.tauP is None else self.tauP.g

    @property
    def gpp(self) -> int:
        return self.t.shape[0]

    __hash__ = None


def base_distance(b1: BasePoint, b2: BasePoint) -> float:
    """Product distance ``sqrt(d_Siegel(tau'_1, tau'_2)^2 + d_trop(t_1, t_2)^2)``."""
    if b1.gprime != b2.gprime or b1.gpp != b2.gpp:
        raise DimensionMismatch("base points of different shapes")
    dh = 0.0 if b1.tauP is None else siegel_distance(b1.tauP, b2.tauP)
    return float(np.hypot(dh, trwp_distance(b1.t, b2.t)))


def base_norm_sq(base: BasePoint, VP: Optional[TangentVec], W: np.ndarray) -> float:
    n = trwp_norm_sq(base.t, W)
    if base.tauP is not None:
        n += wp_norm_sq(base.tauP, VP)
    return n


def project(tau: SiegelPoint, gprime: int) -> BasePoint:
    b = split_blocks(tau, gprime)
    if gprime == 0:
        return BasePoint(None, tau.Y.copy())
    t = sym(b.YPP - b.YPPP.T @ np.linalg.solve(b.YP, b.YPPP))
    return BasePoint(SiegelPoint(b.XP, b.YP), t)


@dataclass(frozen=True)
class FiberCoords:
    XPPP: np.ndarray
    YPPP: np.ndarray
    XPP: np.ndarray

    def vector(self) -> np.ndarray:
        iu = np.triu_indices(self.XPP.shape[0])
        return np.concatenate([self.XPPP.ravel(), self.YPPP.ravel(), self.XPP[iu]])


def fiber_coords(tau: SiegelPoint, gprime: int) -> FiberCoords:
    b = split_blocks(tau, gprime)
    return FiberCoords(b.XPPP.copy(), b.YPPP.copy(), b.XPP.copy())


def _assemble_arrays(base: BasePoint, fc: FiberCoords) -> tuple[np.ndarray, np.ndarray]:
    if base.tauP is None:
        return fc.XPP.copy(), base.t.copy()
    XP, YP = base.tauP.X, base.tauP.Y
    YPP = base.t + fc.YPPP.T @ np.linalg.solve(YP, fc.YPPP)
    X = np.block([[XP, fc.XPPP], [fc.XPPP.T, fc.XPP]])
    Y = np.block([[YP, fc.YPPP], [fc.YPPP.T, YPP]])
    return sym(X), sym(Y)


def assemble(base: BasePoint, fc: FiberCoords) -> SiegelPoint:
    """The point over ``base`` with fibre coordinates ``fc``."""
    return SiegelPoint(*_assemble_arrays(base, fc))


# -- the conjugator and the differential ------------------------------------


def conjugator(tau: SiegelPoint, gprime: int) -> np.ndarray:
    """``P = [[I, 0], [-Y'''^t (Y')^{-1}, I]]``, so that ``P Y P^t = diag(Y', t)``."""
    b = split_blocks(tau, gprime)
    g = tau.g
    P = np.eye(g)
    if gprime:
        P[gprime:, :gprime] = -np.linalg.solve(b.YP, b.YPPP).T
    return P


def conjugator_identities(tau: SiegelPoint, gprime: int) -> float:
    P = conjugator(tau, gprime)
    base = project(tau, gprime)
    k = gprime
    D = np.zeros_like(tau.Y)
    Di = np.zeros_like(tau.Y)
    if k:
        D[:k, :k] = base.tauP.Y
        Di[:k, :k] = np.linalg.inv(base.tauP.Y)
    D[k:, k:] = base.t
    Di[k:, k:] = np.linalg.inv(base.t)
    r1 = np.linalg.norm(P @ tau.Y @ P.T - D)
    r2 = np.linalg.norm(np.linalg.inv(tau.Y) - P.T @ Di @ P)
    return float(max(r1, r2))


def dpi_pushforward(tau: SiegelPoint, V: TangentVec, gprime: int) -> tuple[Optional[TangentVec], np.ndarray]:
    """Exact differential of :func:`project`.

    ``V' = (V'_X, V'_Y)`` and
    ``W = V''_Y - V'''_Y^t A - A^t V'''_Y + A^t V'_Y A`` with ``A = (Y')^{-1} Y'''``.
    """
    if V.g != tau.g:
        raise DimensionMismatch(f"tangent of size {V.g} at a point of size {tau.g}")
    b = split_blocks(tau, gprime)
    k = gprime
    if k == 0:
        return None, V.VY.copy()
    VXp, _, _ = _split_sym(V.VX, k)
    VYp, VYppp, VYpp = _split_sym(V.VY, k)
    A = np.linalg.solve(b.YP, b.YPPP)
    W = VYpp - VYppp.T @ A - A.T @ VYppp + A.T @ VYp @ A
    return TangentVec(VXp, VYp), sym(W)


def vertical_lift(tau: SiegelPoint, gprime: int, dXPPP, dYPPP, dXPP) -> TangentVec:
    """Velocity of the fibre curve ``(X''', Y''', X'') + s (dX''', dY''', dX'')``."""
    b = split_blocks(tau, gprime)
    k, g = gprime, tau.g
    dXPP = sym(np.asarray(dXPP, dtype=float))
    VX = np.zeros((g, g))
    VY = np.zeros((g, g))
    VX[k:, k:] = dXPP
    if k:
        dXPPP = np.asarray(dXPPP, dtype=float).reshape(k, g - k)
        dYPPP = np.asarray(dYPPP, dtype=float).reshape(k, g - k)
        VX[:k, k:] = dXPPP
        VX[k:, :k] = dXPPP.T
        VY[:k, k:] = dYPPP
        VY[k:, :k] = dYPPP.T
        A = np.linalg.solve(b.YP, b.YPPP)
        VY[k:, k:] = sym(dYPPP.T @ A + A.T @ dYPPP)
    return TangentVec(VX, VY)


def fiber_dimension(g: int, gprime: int) -> int:
    gpp = g - gprime
    return 2 * gprime * gpp + gpp * (gpp + 1) // 2


def _unit_fiber_dirs(g: int, gprime: int):
    k, gpp = gprime, g - gprime
    zero3 = np.zeros((k, gpp))
    zero2 = np.zeros((gpp, gpp))
    for i in range(k):
        for j in range(gpp):
            E = zero3.copy()
            E[i, j] = 1.0
            yield E, zero3, zero2
    for i in range(k):
        for j in range(gpp):
            E = zero3.copy()
            E[i, j] = 1.0
            yield zero3, E, zero2
    for i in range(gpp):
        for j in range(i, gpp):
            E = zero2.copy()
            E[i, j] = E[j, i] = 1.0
            yield zero3, zero3, E


def vertical_basis(tau: SiegelPoint, gprime: int) -> list[TangentVec]:
    _check_gprime(tau.g, gprime)
    basis = [vertical_lift(tau, gprime, a, b, c) for a, b, c in _unit_fiber_dirs(tau.g, gprime)]
    assert len(basis) == fiber_dimension(tau.g, gprime)
    return basis


def horizontal_part(tau: SiegelPoint, V: TangentVec, gprime: int) -> TangentVec:
    """WP-orthogonal projection of ``V`` onto the complement of the vertical space."""
    basis = vertical_basis(tau, gprime)
    G = np.array([[wp_inner(tau, a, b) for b in basis] for a in basis])
    rhs = np.array([wp_inner(tau, a, V) for a in basis])
    coef = np.linalg.solve(G, rhs)
    out = V
    for c, B in zip(coef, basis):
        out = out - c * B
    return out


def is_vertical(tau: SiegelPoint, V: TangentVec, gprime: int, tol: float = 1e-9) -> bool:
    """``V' = 0`` and ``d pi (V)`` has vanishing ``t``-component, relative to ``tol``."""
    VP, W = dpi_pushforward(tau, V, gprime)
    scale = tol * max(1.0, np.sqrt(V.frob_sq()))
    if VP is not None and np.sqrt(VP.frob_sq()) > scale:
        return False
    return bool(np.linalg.norm(W) <= scale)


# -- vertical norms and their bounds ----------------------------------------


def _require_vertical(tau, V, gprime):
    if not is_vertical(tau, V, gprime):
        raise NotVertical("tangent vector has a horizontal component")


def vertical_norm_sq(tau: SiegelPoint, V: TangentVec, gprime: int) -> float:
    r"""Block form of the metric on vertical vectors.

    ``tr(t^{-1} V'''_X^t (Y')^{-1} V'''_X) + tr(t^{-1} V'''_Y^t (Y')^{-1} V'''_Y)
    + (1/2) tr(t^{-1} Vt t^{-1} Vt)`` with
    ``Vt = V''_X - V'''_X^t (Y')^{-1} Y''' - Y'''^t (Y')^{-1} V'''_X``.
    """
    _require_vertical(tau, V, gprime)
    b = split_blocks(tau, gprime)
    t = project(tau, gprime).t
    k = gprime
    _, VXppp, VXpp = _split_sym(V.VX, k)
    _, VYppp, _ = _split_sym(V.VY, k)
    ti = np.linalg.inv(t)
    total = 0.0
    Vt = VXpp
    if k:
        YPi = np.linalg.inv(b.YP)
        total += np.trace(ti @ VXppp.T @ YPi @ VXppp) + np.trace(ti @ VYppp.T @ YPi @ VYppp)
        Vt = VXpp - VXppp.T @ YPi @ b.YPPP - b.YPPP.T @ YPi @ VXppp
    total += 0.5 * np.trace(ti @ Vt @ ti @ Vt)
    return float(max(total, 0.0))


def vertical_norm_constant(c1: float, c2: float, lam: float) -> float:
    """Constant ``C`` with ``|V|^2 <= C/lam (a^2 + b^2) + C/lam^2 c^2``.

    ``c1 >= ||(Y')^{-1}||_op``, ``c2 >= ||Y'''||_op``; independent of ``lam`` once
    ``lam >= 1``.
    """
    return max(1.0, c1 + 4.0 * c1 * c1 * c2 * c2 / min(lam, 1.0))


def vertical_bound(tau: SiegelPoint, V: TangentVec, gprime: int) -> float:
    """Certified upper bound on ``|V|^2`` for vertical ``V`` in terms of
    ``lambda_min(t)`` and the Frobenius norms of ``V'''_X, V'''_Y, V''_X``."""
    _require_vertical(tau, V, gprime)
    b = split_blocks(tau, gprime)
    lam = lambda_min(project(tau, gprime).t)
    k = gprime
    _, VXppp, VXpp = _split_sym(V.VX, k)
    _, VYppp, _ = _split_sym(V.VY, k)
    c1 = op_norm(np.linalg.inv(b.YP)) if k else 0.0
    c2 = op_norm(b.YPPP) if k else 0.0
    C = vertical_norm_constant(c1, c2, lam)
    ab = float(np.sum(VXppp**2) + np.sum(VYppp**2))
    c = float(np.sum(VXpp**2))
    return C / lam * ab + C / lam**2 * c


# -- fibre paths and diameters -----------------------------------------------


@dataclass(frozen=True)
class FiberBox:
    """Half-widths of the coordinate box ``|X'''| , |Y'''|, |X''|`` (entrywise)."""

    hw_xppp: float
    hw_yppp: float
    hw_xpp: float

    @classmethod
    def siegel(cls, u: float, g: int) -> "FiberBox":
        return cls(u, u * (1.0 + u * g), u)

    @classmethod
    def lattice(cls, YP: np.ndarray) -> "FiberBox":
        """A fundamental cell of the integral unipotent group: every fibre point
        is equivalent to one with coordinates in this box."""
        YP = np.atleast_2d(np.asarray(YP, dtype=float))
        hw_y = 0.5 * float(np.abs(YP).sum(axis=1).max()) if YP.size else 0.0
        return cls(0.5, hw_y, 0.5)

    def radii(self, g: int, gprime: int) -> tuple[float, float, float]:
        """Frobenius bounds on coordinate differences of two points in the box."""
        gpp = g - gprime
        m = np.sqrt(gprime * gpp)
        return 2 * self.hw_xppp * m, 2 * self.hw_yppp * m, 2 * self.hw_xpp * gpp

    def yppp_op_bound(self, g: int, gprime: int) -> float:
        return self.hw_yppp * np.sqrt(gprime * (g - gprime))

    def sample(self, rng: np.random.Generator, g: int, gprime: int) -> FiberCoords:
        k, gpp = gprime, g - gprime
        a = rng.uniform(-self.hw_xppp, self.hw_xppp, size=(k, gpp))
        b = rng.uniform(-self.hw_yppp, self.hw_yppp, size=(k, gpp))
        c = np.triu(rng.uniform(-self.hw_xpp, self.hw_xpp, size=(gpp, gpp)))
        return FiberCoords(a, b, c + np.triu(c, 1).T)

    def corner(self, signs: np.ndarray, g: int, gprime: int) -> FiberCoords:
        k, gpp = gprime, g - gprime
        n3 = k * gpp
        a = self.hw_xppp * signs[:n3].reshape(k, gpp)
        b = self.hw_yppp * signs[n3 : 2 * n3].reshape(k, gpp)
        c = np.zeros((gpp, gpp))
        c[np.triu_indices(gpp)] = self.hw_xpp * signs[2 * n3 :]
        return FiberCoords(a, b, c + np.triu(c, 1).T)


def _same_base(b1: BasePoint, b2: BasePoint, tol: float = 1e-9) -> bool:
    def close(A, B):
        return np.linalg.norm(A - B) <= tol * max(1.0, np.linalg.norm(A))

    if b1.gprime != b2.gprime or b1.gpp != b2.gpp or not close(b1.t, b2.t):
        return False
    if b1.tauP is None:
        return True
    return close(b1.tauP.X, b2.tauP.X) and close(b1.tauP.Y, b2.tauP.Y)


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(n: int):
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[n]


def _fiber_legs(fp: FiberCoords, fq: FiberCoords):
    """The three straight legs X''' -> Y''' -> X'' as (start, end) fibre coordinates."""
    m1 = FiberCoords(fq.XPPP, fp.YPPP, fp.XPP)
    m2 = FiberCoords(fq.XPPP, fq.YPPP, fp.XPP)
    return [(fp, m1), (m1, m2), (m2, fq)]


class _BaseFrame:
    """Array cache for one base point, used by the hot loops (no validation)."""

    def __init__(self, base: BasePoint):
        self.base = base
        self.k = k = base.gprime
        self.g = k + base.gpp
        self.t = base.t
        self.t_chol_inv = np.linalg.inv(np.linalg.cholesky(base.t))
        if k:
            self.XP, self.YP = base.tauP.X, base.tauP.Y
            self.YPi = np.linalg.inv(self.YP)
            w, V = np.linalg.eigh(self.YP)
            self.YP_isqrt = (V / np.sqrt(w)) @ V.T

    def distance(self, other: "_BaseFrame") -> float:
        """Same value as :func:`base_distance`."""
        M = self.t_chol_inv @ other.t @ self.t_chol_inv.T
        mu = np.linalg.eigvalsh(0.5 * (M + M.T))
        d2 = 0.5 * float(np.sum(np.log(mu) ** 2))
        if self.k:
            Ri = self.YP_isqrt
            W = Ri @ (other.XP - self.XP + 1j * other.YP) @ Ri
            I = np.eye(self.k)
            sv = np.linalg.svd((W - 1j * I) @ np.linalg.inv(W + 1j * I), compute_uv=False)
            if np.any(sv >= 1.0 - 1e-15):
                return base_distance(self.base, other.base)
            d2 += 0.5 * float(np.sum((2.0 * np.arctanh(sv)) ** 2))
        return float(np.sqrt(d2))

    def leg_length(self, a: FiberCoords, b: FiberCoords, nodes: int) -> float:
        """Gauss-Legendre length of the straight leg from ``a`` to ``b``,
        measured with the full metric on the exact velocity."""
        k, g = self.k, self.g
        dX3, dY3, dX2 = b.XPPP - a.XPPP, b.YPPP - a.YPPP, b.XPP - a.XPP
        if not (np.any(dX3) or np.any(dY3) or np.any(dX2)):
            return 0.0
        VX = np.zeros((g, g))
        VX[k:, k:] = dX2
        VX[:k, k:] = dX3
        VX[k:, :k] = dX3.T
        VY = np.zeros((g, g))
        VY[:k, k:] = dY3
        VY[k:, :k] = dY3.T
        Y = np.empty((g, g))
        if k:
            Y[:k, :k] = self.YP
        xs, ws = _gauss_legendre(nodes)
        total = 0.0
        for s, w in zip(xs, ws):
            Y3 = a.YPPP + s * dY3
            if k:
                A = self.YPi @ Y3
                Y[:k, k:] = Y3
                Y[k:, :k] = Y3.T
                Y[k:, k:] = self.t + Y3.T @ A
                VY[k:, k:] = dY3.T @ A + A.T @ dY3
            else:
                Y[:, :] = self.t
            total += w * np.sqrt(max(wp_norm_sq_arrays(Y, VX, VY), 0.0))
        return float(total)

    def path_length(self, fp: FiberCoords, fq: FiberCoords, nodes: int) -> float:
        return sum(self.leg_length(a, b, nodes) for a, b in _fiber_legs(fp, fq))

    def transport(self, src: "_BaseFrame", fc: FiberCoords) -> FiberCoords:
        """Fibre coordinates over this base of the horizontal transport of the
        point ``(src, fc)``."""
        if not self.k:
            return fc
        Kt = src.YPi @ fc.YPPP  # K^t, shape (g', g'')
        S3 = fc.XPPP - src.XP @ Kt
        S2 = fc.XPP - Kt.T @ src.XP @ Kt
        return FiberCoords(self.XP @ Kt + S3, self.YP @ Kt, sym(Kt.T @ self.XP @ Kt + S2))

    def reduce(self, fc: FiberCoords, target: FiberCoords) -> FiberCoords:
        """Integral unipotent move of ``fc`` toward ``target`` (same base)."""
        X3, Y3, X2 = fc.XPPP, fc.YPPP, fc.XPP
        if self.k:
            kt = np.rint(self.YPi @ (target.YPPP - Y3))  # k^t, (g', g'')
            X2 = X2 + kt.T @ X3 + X3.T @ kt + kt.T @ self.XP @ kt
            X3 = X3 + self.XP @ kt
            Y3 = Y3 + self.YP @ kt
        S2 = np.rint(sym(target.XPP - X2))
        return FiberCoords(X3 + np.rint(target.XPPP - X3), Y3, sym(X2 + S2))


def _frame(base: BasePoint) -> _BaseFrame:
    return _BaseFrame(base)


def fiber_path_length(tau_p: SiegelPoint, tau_q: SiegelPoint, gprime: int, nodes: int = 4) -> float:
    """Length of the three-leg fibre path from ``tau_p`` to ``tau_q``.

    Each leg is integrated with ``nodes``-point Gauss-Legendre quadrature of
    the full metric along the exact (vertical) velocity.  Upper-bounds the
    distance inside the fibre.
    """
    bp, bq = project(tau_p, gprime), project(tau_q, gprime)
    if not _same_base(bp, bq):
        raise BaseMismatch("points lie over different base points")
    fp, fq = fiber_coords(tau_p, gprime), fiber_coords(tau_q, gprime)
    return _frame(bp).path_length(fp, fq, nodes)


def fiber_path_bound(tau_p: SiegelPoint, tau_q: SiegelPoint, gprime: int) -> float:
    """Certified bound on :func:`fiber_path_length` from integrating the
    vertical bound along each leg."""
    bp = project(tau_p, gprime)
    fp, fq = fiber_coords(tau_p, gprime), fiber_coords(tau_q, gprime)
    lam = lambda_min(bp.t)
    k = gprime
    c1 = op_norm(np.linalg.inv(bp.tauP.Y)) if k else 0.0
    c2 = max(op_norm(fp.YPPP), op_norm(fq.YPPP)) if k else 0.0
    C = vertical_norm_constant(c1, c2, lam)
    a = np.linalg.norm(fq.XPPP - fp.XPPP)
    b = np.linalg.norm(fq.YPPP - fp.YPPP)
    c = np.linalg.norm(fq.XPP - fp.XPP)
    return float(np.sqrt(C / lam) * (a + b) + np.sqrt(C) / lam * c)


def _diameter_bound(c1: float, c2: float, lam: float, radii) -> float:
    ra, rb, rc = radii
    C = vertical_norm_constant(c1, c2, lam)
    return float(np.sqrt(C) * (ra + rb) / np.sqrt(lam) + np.sqrt(C) * rc / lam)


def _check_base(base: BasePoint, gprime: int):
    if base.gprime != gprime:
        raise DimensionMismatch(f"base point has g'={base.gprime}, expected {gprime}")


def fiber_diameter_bound(
    base: BasePoint, gprime: int, u: float = DEFAULT_U, box: Optional[FiberBox] = None
) -> float:
    """Certified bound ``C_{tau'} / sqrt(lambda_min(t))`` on the length of any
    three-leg path between two points of the fibre box."""
    _check_base(base, gprime)
    g = base.gprime + base.gpp
    box = box or FiberBox.siegel(u, g)
    k = base.gprime
    c1 = op_norm(np.linalg.inv(base.tauP.Y)) if k else 0.0
    return _diameter_bound(c1, box.yppp_op_bound(g, k), lambda_min(base.t), box.radii(g, k))


def fiber_diameter_upper(
    base: BasePoint,
    gprime: int,
    u: float = DEFAULT_U,
    samples: int = 64,
    seed: int = 0,
    box: Optional[FiberBox] = None,
    max_corner_dim: int = 10,
) -> float:
    """Largest three-leg path length over pairs of points in the fibre box.

    Pairs are the antipodal corners of the box (when the fibre dimension is at
    most ``max_corner_dim``) together with ``samples`` uniformly random pairs.
    """
    _check_base(base, gprime)
    if not u > 1:
        raise ValidationError(f"u must exceed 1, got {u}")
    g = base.gprime + base.gpp
    k = base.gprime
    box = box or FiberBox.siegel(u, g)
    dim = fiber_dimension(g, k)
    pairs = []
    if dim <= max_corner_dim:
        for tail in itertools.product((-1.0, 1.0), repeat=dim - 1):
            s = np.array((1.0,) + tail)
            pairs.append((box.corner(s, g, k), box.corner(-s, g, k)))
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0xF1B])))
    for _ in range(samples):
        pairs.append((box.sample(rng, g, k), box.sample(rng, g, k)))
    frame = _frame(base)
    return max((frame.path_length(fp, fq, 2) for fp, fq in pairs), default=0.0)


# -- Siegel-set lower bound on lambda_min(t) ---------------------------------


def lambda_lower_bound(tau: SiegelPoint, gprime: int, u: float = DEFAULT_U) -> float:
    """Certified ``d_min / ||(L'')^{-1}||_op^2 <= lambda_min(t)`` where ``L''`` and
    ``d_min`` come from the lower-right block of the Jacobi decomposition."""
    _check_gprime(tau.g, gprime)
    if not in_siegel_set(tau, u):
        raise NotInSiegelSet("point is outside the Siegel set")
    c = siegel_coords(tau)
    Lpp = c.L[gprime:, gprime:]
    return float(c.d[gprime:].min() / op_norm(np.linalg.inv(Lpp)) ** 2)


# -- fibre transport (the N-action) ------------------------------------------


def transport_to_base(tau_p: SiegelPoint, base_q: BasePoint, gprime: int) -> SiegelPoint:
    """End point of the horizontal lift, through ``tau_p``, of any base curve
    ending at ``base_q``.

    ``tau_p`` is written as ``n . (tau'_p (+) i t_p)`` with ``n`` in the real
    unipotent radical (a shear followed by a translation); the result is
    ``n . (tau'_q (+) i t_q)``.
    """
    src = _frame(project(tau_p, gprime))
    return assemble(base_q, _frame(base_q).transport(src, fiber_coords(tau_p, gprime)))


def reduce_in_fiber(tau: SiegelPoint, target: SiegelPoint, gprime: int) -> SiegelPoint:
    """Move ``tau`` by the integral unipotent group (integer shears of ``Y'''``
    by columns of ``Y'``, integer translations of ``X''', X''``) as close as
    possible, coordinatewise, to ``target`` in the same fibre."""
    base = project(tau, gprime)
    if not _same_base(base, project(target, gprime)):
        raise BaseMismatch("points lie over different base points")
    fc = _frame(base).reduce(fiber_coords(tau, gprime), fiber_coords(target, gprime))
    return assemble(base, fc)


# -- collapse bounds ----------------------------------------------------------


@dataclass(frozen=True)
class CollapseBounds:
    lambda_min: float
    lambda_window: tuple[float, float]
    delta: float
    gh_upper: float
    # delta = constant * exp(R / sqrt 2) / sqrt(lambda_min)
    constant: float


def collapse_bounds(
    tau_n: SiegelPoint, gprime: int, R: float, u: float = DEFAULT_U, box: Optional[FiberBox] = None
) -> CollapseBounds:
    """Certified window for ``lambda_min(t)`` over the base ball of radius ``R``,
    a bound ``delta`` on every fibre-path slack in the ball, and ``delta / 2``.

    The slack paths connect points whose fibre coordinates lie in ``box`` or
    differ by a lattice-reduced transport, so both radii are accounted for.
    """
    _check_gprime(tau_n.g, gprime)
    if R < 0:
        raise ValidationError("R must be nonnegative")
    if not in_siegel_set(tau_n, u):
        raise NotInSiegelSet("base sequence point is outside the Siegel set")
    g, k = tau_n.g, gprime
    box = box or FiberBox.siegel(u, g)
    base = project(tau_n, k)
    lam = lambda_min(base.t)
    grow = np.exp(np.sqrt(2.0) * R)
    lo, hi = lam / grow, lam * grow
    if lo < 1.0:
        raise NotDeepEnough(f"lambda_min(t) can drop to {lo:.3g} < 1 inside the ball")
    m = np.sqrt(k * (g - k))
    if k:
        c1 = grow * op_norm(np.linalg.inv(base.tauP.Y))
        yp_sup = grow * op_norm(base.tauP.Y)
    else:
        c1 = yp_sup = 0.0
    ra, rb, rc = box.radii(g, k)
    radii = (max(ra, m), max(rb, 0.5 * yp_sup * m), max(rc, float(g - k)))
    c2 = box.yppp_op_bound(g, k) + 0.5 * yp_sup * m
    delta = _diameter_bound(c1, c2, lo, radii)
    const = delta * np.sqrt(lam) / np.exp(R / np.sqrt(2.0))
    return CollapseBounds(lam, (lo, hi), delta, delta / 2.0, float(const))
