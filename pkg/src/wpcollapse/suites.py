"""Closed-form validation suites for g = 1 and g = 2, and the quick property
sweeps behind ``wpcollapse verify``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .collapse import measure_distortion, rate_fit, sample_ball
from .horo import (
    FiberBox,
    base_norm_sq,
    dpi_pushforward,
    fiber_path_length,
    horizontal_part,
    project,
    vertical_lift,
    vertical_norm_sq,
)
from .linalg import jacobi_decompose, sym
from .reduction import reduce_sl2, reduce_spd, siegel_coords, siegel_set_clauses
from .siegel import SiegelPoint, SymplecticMat, TangentVec, act, potential_hessian_check, push_forward, wp_inner, wp_norm_sq
from .tropical import normalize_basepoint, trwp_distance, trwp_geodesic


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    tol: float


@dataclass
class SuiteReport:
    name: str
    checks: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, value: float, tol: float, passed: bool | None = None):
        ok = bool(value <= tol) if passed is None else bool(passed)
        self.checks.append(Check(name, ok, float(value), float(tol)))


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tag])))


# -- g = 1 -------------------------------------------------------------------


def cusp_metric(r: float, dr: float, dtheta: float) -> float:
    """``(1/2)(dr^2 + e^{-2r} dtheta^2)``."""
    return 0.5 * (dr * dr + np.exp(-2.0 * r) * dtheta * dtheta)


def circle_circumference(r: float) -> float:
    """Length of the closed fibre circle ``x in [0, 1]`` at height ``y = e^r``."""
    y = np.exp(r)
    p = SiegelPoint([[0.0]], [[y]])
    q = SiegelPoint([[1.0]], [[y]])
    return fiber_path_length(p, q, 0)


def g1_suite(seed: int = 0, R: float = 1.0, m: int = 40, r_values=range(1, 11)) -> SuiteReport:
    rep = SuiteReport("g1")
    rng = _rng(seed, 1)

    # coordinate change r = log y, theta = x
    worst = 0.0
    for _ in range(100):
        x, y = rng.uniform(-2, 2), np.exp(rng.uniform(-3, 6))
        dx, dy = rng.standard_normal(2)
        direct = wp_norm_sq(SiegelPoint([[x]], [[y]]), TangentVec([[dx]], [[dy]]))
        worst = max(worst, abs(cusp_metric(np.log(y), dy / y, dx) - direct) / direct)
    rep.add("coordinate_change", worst, 1e-10)

    # fibre circumference
    worst = 0.0
    for r in (0.0, 1.0, np.log(100.0), 5.0, 10.0):
        c = circle_circumference(r)
        worst = max(worst, abs(c - np.exp(-r) / np.sqrt(2.0)) / (np.exp(-r) / np.sqrt(2.0)))
    rep.add("circumference", worst, 1e-10)
    r0 = np.log(100.0)
    rep.extras["circumference_at_log100"] = circle_circumference(r0)
    rep.extras["metric_diameter_at_log100"] = circle_circumference(r0) / 2.0

    # GH upper bound between B(tau_n, R) and B(s_n, R) along r_n
    box = FiberBox(0.5, 0.0, 0.5)
    series = []
    for r in r_values:
        tau = SiegelPoint([[0.0]], [[np.exp(r)]])
        samples = sample_ball(tau, R, m, seed, 0, box=box, n=int(r))
        d = measure_distortion(tau, R, samples, 0, box=box, n=int(r))
        series.append((np.exp(r), d.gh_upper_measured))
    fit = rate_fit(series)
    rep.extras["gh_series"] = series
    rep.extras["gh_fit"] = fit
    rep.add("gh_slope_in_r", abs(fit.slope + 1.0), 0.05)

    # basepoint renormalization sends t_n = e^{s_n} to 1
    ts = [np.array([[np.exp(r)]]) for r in r_values]
    normed = normalize_basepoint(ts, [float(t[0, 0]) for t in ts])
    rep.add("renormalization", max(abs(t[0, 0] - 1.0) for t in normed), 1e-15)
    return rep


# -- g = 2 -------------------------------------------------------------------

G2_COORDS = ("theta1", "theta2", "theta3", "theta4", "r1", "r2")


def g2_chart(theta, r) -> SiegelPoint:
    """``(x1, x2, x3, l21, log d1, log d2) -> tau``."""
    t1, t2, t3, l = theta
    d1, d2 = np.exp(r[0]), np.exp(r[1])
    X = np.array([[t1, t2], [t2, t3]])
    Y = np.array([[d1, l * d1], [l * d1, l * l * d1 + d2]])
    return SiegelPoint(X, Y)


def g2_chart_inverse(tau: SiegelPoint) -> tuple[np.ndarray, np.ndarray]:
    c = siegel_coords(tau)
    return np.array([tau.X[0, 0], tau.X[0, 1], tau.X[1, 1], c.L[1, 0]]), np.log(c.d)


def _g2_jacobian(theta, r) -> list[TangentVec]:
    l = theta[3]
    d1, d2 = np.exp(r[0]), np.exp(r[1])
    Z = np.zeros((2, 2))
    return [
        TangentVec([[1.0, 0.0], [0.0, 0.0]], Z),
        TangentVec([[0.0, 1.0], [1.0, 0.0]], Z),
        TangentVec([[0.0, 0.0], [0.0, 1.0]], Z),
        TangentVec(Z, [[0.0, d1], [d1, 2 * l * d1]]),
        TangentVec(Z, [[d1, l * d1], [l * d1, l * l * d1]]),
        TangentVec(Z, [[0.0, 0.0], [0.0, d2]]),
    ]


def g2_pullback_tensor(theta, r) -> np.ndarray:
    """Gram matrix of the metric in the chart coordinates."""
    tau = g2_chart(theta, r)
    J = _g2_jacobian(theta, r)
    return np.array([[wp_inner(tau, a, b) for b in J] for a in J])


def g2_displayed_tensor(theta, r) -> np.ndarray:
    """The closed-form coordinate expression, as a symmetric Gram matrix.

    A printed cross term ``c dtheta_a dtheta_b`` contributes ``c/2`` to both
    off-diagonal entries.
    """
    th4 = theta[3]
    r1, r2 = r
    e = np.exp(r1 - r2)
    G = np.zeros((6, 6))
    G[4, 4] = G[5, 5] = 1.0
    G[3, 3] = 2.0 * e
    G[0, 0] = (1.0 + e * th4**2) ** 2 / np.exp(2 * r1)
    G[1, 1] = 2.0 * (1.0 + 2.0 * e * th4**2) / np.exp(r1 + r2)
    G[2, 2] = 1.0 / np.exp(2 * r2)
    G[0, 1] = G[1, 0] = -2.0 * th4 * (1.0 + e * th4**2) / np.exp(r1 + r2)
    G[0, 2] = G[2, 0] = th4**2 / np.exp(2 * r2)
    G[1, 2] = G[2, 1] = -2.0 * th4 / np.exp(2 * r2)
    return 0.5 * G


def g2_base_tensor(theta, r) -> np.ndarray:
    """Half the pull-back of the hyperbolic metric on ``tau_1`` plus ``dt^2/t^2``."""
    B = np.zeros((6, 6))
    B[0, 0] = 0.5 * np.exp(-2.0 * r[0])
    B[4, 4] = B[5, 5] = 0.5
    return B


def g2_remainder(theta, r) -> float:
    return float(np.abs(g2_displayed_tensor(theta, r) - g2_base_tensor(theta, r)).max())


def g2_suite(seed: int = 0, R: float = 1.0, m: int = 40, r2_values=range(2, 13), u: float = 2.0) -> SuiteReport:
    rep = SuiteReport("g2")
    rng = _rng(seed, 2)
    worst = 0.0
    for _ in range(100):
        theta = rng.uniform(-u, u, size=4) * 0.999
        r1 = rng.uniform(-np.log(u) + 0.01, 3.0)
        r2 = r1 - np.log(u) + rng.uniform(0.01, 6.0)
        G = g2_pullback_tensor(theta, (r1, r2))
        D = g2_displayed_tensor(theta, (r1, r2))
        worst = max(worst, np.abs(G - D).max() / np.abs(G).max())
    rep.add("displayed_tensor", worst, 1e-9)

    box = FiberBox(0.5, 0.5, 0.5)
    series = []
    for r2 in r2_values:
        tau = g2_chart(np.zeros(4), (0.0, float(r2)))
        # the same draws at every r2 isolate the dependence on r2
        pts = sample_ball(tau, R, m, seed, 1, box=box, n=0)
        sup = max(g2_remainder(*g2_chart_inverse(p)) for p in pts)
        series.append((np.exp(r2), sup))
    fit = rate_fit(series)
    rep.extras["remainder_series"] = series
    rep.extras["remainder_fit"] = fit
    rep.add("remainder_slope_in_r2", abs(fit.slope + 1.0), 0.1)
    return rep


# -- property sweeps -----------------------------------------------------------


def random_point(rng, g: int) -> SiegelPoint:
    A = rng.standard_normal((g, g))
    return SiegelPoint(sym(rng.standard_normal((g, g))), A @ A.T + 0.3 * np.eye(g))


def random_tangent(rng, g: int) -> TangentVec:
    return TangentVec(sym(rng.standard_normal((g, g))), sym(rng.standard_normal((g, g))))


def random_symplectic(rng, g: int) -> SymplecticMat:
    """Product of a translation, a congruence and a frame change."""
    S = sym(rng.standard_normal((g, g)))
    A = rng.standard_normal((g, g)) + 2.0 * np.eye(g)
    M = SymplecticMat.translation(S) @ SymplecticMat.congruence(A)
    J = SymplecticMat(np.zeros((g, g)), -np.eye(g), np.eye(g), np.zeros((g, g)))
    return M @ J @ SymplecticMat.frame(random_point(rng, g))


def property_sweeps(seed: int = 0, scale: int = 1) -> SuiteReport:
    """Quick randomized checks of the core identities (``scale`` multiplies
    the trial counts)."""
    rep = SuiteReport("properties")
    rng = _rng(seed, 3)

    worst = 0.0
    for _ in range(50 * scale):
        g = int(rng.integers(1, 5))
        tau, V, M = random_point(rng, g), random_tangent(rng, g), random_symplectic(rng, g)
        a = wp_norm_sq(tau, V)
        b = wp_norm_sq(act(M, tau), push_forward(M, tau, V))
        worst = max(worst, abs(a - b) / a)
    rep.add("metric_invariance", worst, 1e-9)

    worst = 0.0
    for _ in range(5 * scale):
        worst = max(worst, potential_hessian_check(random_point(rng, int(rng.integers(1, 4)))))
    rep.add("potential_hessian", worst, 1e-5)

    worst_id = 0.0
    lip = 0
    worst_h = 0.0
    for _ in range(50 * scale):
        g = int(rng.integers(2, 5))
        k = int(rng.integers(0, g))
        tau = random_point(rng, g)
        gpp = g - k
        V = vertical_lift(tau, k, rng.standard_normal((k, gpp)), rng.standard_normal((k, gpp)), sym(rng.standard_normal((gpp, gpp))))
        a, b = vertical_norm_sq(tau, V, k), wp_norm_sq(tau, V)
        worst_id = max(worst_id, abs(a - b) / b)
        T = random_tangent(rng, g)
        VP, W = dpi_pushforward(tau, T, k)
        base = project(tau, k)
        lip += base_norm_sq(base, VP, W) > wp_norm_sq(tau, T) * (1 + 1e-9)
        H = horizontal_part(tau, T, k)
        VP, W = dpi_pushforward(tau, H, k)
        hn = wp_norm_sq(tau, H)
        worst_h = max(worst_h, abs(base_norm_sq(base, VP, W) - hn) / hn)
    rep.add("vertical_norm_identity", worst_id, 1e-10)
    rep.add("submersion_violations", lip, 0)
    rep.add("horizontal_isometry", worst_h, 1e-9)

    worst = 0.0
    for _ in range(20 * scale):
        r = int(rng.integers(1, 5))
        A = rng.standard_normal((r, r))
        P = A @ A.T + 0.3 * np.eye(r)
        V = sym(rng.standard_normal((r, r)))
        Ri = np.linalg.inv(np.linalg.cholesky(P))
        # unit speed by an independent eigenvalue computation
        V /= np.sqrt(0.5 * np.sum(np.linalg.eigvalsh(sym(Ri @ V @ Ri.T)) ** 2))
        s = rng.uniform(0, 3)
        worst = max(worst, abs(trwp_distance(P, trwp_geodesic(P, V, s)) - s))
    rep.add("tropical_geodesic", worst, 1e-9)
    rep.add("tropical_value", abs(trwp_distance(np.eye(2), np.diag([np.e**2, np.e**-2])) - 2.0), 1e-12)

    bad = 0
    for _ in range(20 * scale):
        g = int(rng.integers(2, 6))
        A = rng.standard_normal((g, g))
        jd = jacobi_decompose(reduce_spd(A @ A.T + 0.1 * np.eye(g)).Y)
        clauses = siegel_set_clauses(jd.L, jd.d, 2.0)
        bad += not (clauses["l_bound"] and clauses["d_chain"])
    rep.add("lll_siegel_chain_failures", bad, 0)
    bad = 0
    for _ in range(50 * scale):
        z = SiegelPoint([[rng.uniform(-5, 5)]], [[np.exp(rng.uniform(-4, 2))]])
        w, _ = reduce_sl2(z)
        x, y = w.X[0, 0], w.Y[0, 0]
        bad += not (abs(x) <= 0.5 + 1e-12 and x * x + y * y >= 1 - 1e-9)
    rep.add("sl2_failures", bad, 0)
    return rep


SUITES = {"g1": g1_suite, "g2": g2_suite, "properties": property_sweeps}


def run_suites(names, seed: int = 0) -> list[SuiteReport]:
    if "all" in names:
        names = list(SUITES)
    return [SUITES[n](seed=seed) for n in names]

