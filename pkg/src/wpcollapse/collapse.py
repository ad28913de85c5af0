"""Experiment harness for collapsing sequences.

A degenerating sequence ``tau_n = X + i L diag(d(n)) L^t`` keeps the first
``g'`` Jacobi scales bounded and sends the rest to infinity.  Around each
``tau_n`` we sample a metric ball, bound the distortion of the projection to
the base, fit decay rates against ``d_{g'+1}`` and compare with the limit
product space.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateDirection,
    DegenerateInput,
    DimensionMismatch,
    NotDeepEnough,
    SiegelChainViolated,
    ValidationError,
)
from .horo import (
    BasePoint,
    FiberBox,
    assemble,
    base_distance,
    collapse_bounds,
    fiber_diameter_bound,
    fiber_diameter_upper,
    _BaseFrame,
    fiber_coords,
    fiber_path_length,
    project,
    reduce_in_fiber,
    transport_to_base,
)
from .linalg import as_sym, certified_le, lambda_min, sqrtm, sym
from .reduction import DEFAULT_U, in_siegel_set, siegel_coords
from .siegel import SiegelPoint, SymplecticMat, act
from .tropical import trwp_distance, trwp_geodesic

# Euler step for the tau'-factor of ball samples, in WP length
WALK_STEP = 0.01

# -- degeneration specs --------------------------------------------------------

PROFILE_KINDS = ("constant", "geometric", "mixed")


@dataclass(frozen=True)
class Profile:
    """Growth law ``d(n)``: ``c``, ``c * rho**n`` or ``a + c * rho**n``."""

    kind: str
    c: float
    rho: float = 1.0
    a: float = 0.0

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValidationError(f"unknown profile kind {self.kind!r}")
        if not self.c > 0 or not self.rho > 0 or self.a < 0:
            raise ValidationError("profile needs c > 0, rho > 0, a >= 0")

    def value(self, n: int) -> float:
        if self.kind == "constant":
            return float(self.c)
        v = self.c * self.rho**n
        return float(v + self.a) if self.kind == "mixed" else float(v)

    @property
    def divergent(self) -> bool:
        return self.kind != "constant" and self.rho > 1

    @property
    def convergent(self) -> bool:
        return self.kind == "constant" or (self.kind == "mixed" and self.rho < 1 and self.a > 0)

    def limit(self) -> float:
        if self.kind == "constant":
            return float(self.c)
        if self.convergent:
            return float(self.a)
        raise ValidationError("profile has no finite positive limit")

    def to_json(self) -> dict:
        return {"kind": self.kind, "c": self.c, "rho": self.rho, "a": self.a}

    @classmethod
    def from_json(cls, obj) -> "Profile":
        if isinstance(obj, (int, float)):
            return cls("constant", float(obj))
        return cls(obj["kind"], float(obj["c"]), float(obj.get("rho", 1.0)), float(obj.get("a", 0.0)))


def _ratio_limit(p: Profile, q: Profile) -> float:
    """``lim p(n) / q(n)`` for two divergent profiles (``inf`` allowed)."""
    if p.rho == q.rho:
        return p.c / q.c
    return np.inf if p.rho > q.rho else 0.0


@dataclass(frozen=True)
class DegenerationSpec:
    g: int
    gprime: int
    L_fixed: np.ndarray
    X_fixed: np.ndarray
    profiles: tuple
    u: float = DEFAULT_U
    seed: int = 0

    def __post_init__(self):
        g, k = self.g, self.gprime
        if not 0 <= k < g:
            raise DimensionMismatch(f"need 0 <= g' < g, got g'={k}, g={g}")
        L = np.array(self.L_fixed, dtype=float)
        X = as_sym(self.X_fixed, name="X_fixed")
        if L.shape != (g, g) or X.shape != (g, g) or len(self.profiles) != g:
            raise DimensionMismatch("L_fixed, X_fixed and profiles must all have size g")
        if not np.allclose(L, np.tril(L)) or not np.allclose(np.diag(L), 1.0):
            raise ValidationError("L_fixed must be unit lower-triangular")
        if not self.u > 1:
            raise ValidationError("u must exceed 1")
        if np.any(np.abs(L[np.tril_indices(g, -1)]) >= self.u) or np.any(np.abs(X) >= self.u):
            raise ValidationError("L_fixed and X_fixed must satisfy the Siegel-set bounds")
        profiles = tuple(p if isinstance(p, Profile) else Profile.from_json(p) for p in self.profiles)
        for i, p in enumerate(profiles):
            if i < k and not p.convergent:
                raise ValidationError(f"scale {i + 1} must stay bounded (index <= g')")
            if i >= k and not p.divergent:
                raise ValidationError(f"scale {i + 1} must diverge (index > g')")
        object.__setattr__(self, "L_fixed", L)
        object.__setattr__(self, "X_fixed", X)
        object.__setattr__(self, "profiles", profiles)

    __hash__ = None

    @property
    def anchor(self) -> Optional[SiegelPoint]:
        """Limit of ``tau'_n``."""
        k = self.gprime
        if k == 0:
            return None
        Lp = self.L_fixed[:k, :k]
        d = np.array([p.limit() for p in self.profiles[:k]])
        return SiegelPoint(self.X_fixed[:k, :k], sym((Lp * d) @ Lp.T))

    @property
    def k_matrix(self) -> np.ndarray:
        """Limits ``k_ij = lim d_i / d_j`` over the divergent indices."""
        div = self.profiles[self.gprime :]
        return np.array([[_ratio_limit(p, q) for q in div] for p in div])

    @property
    def nondegenerate(self) -> bool:
        K = self.k_matrix
        return bool(np.all(np.isfinite(K)) and np.all(K > 0))

    def t_bar_limit(self) -> np.ndarray:
        """Limit of ``t_n / d_g(tau_n)``, namely ``L'' diag(k_{i,g}) L''^t``."""
        if not self.nondegenerate:
            raise DegenerateDirection("scale ratios do not converge to nonzero limits")
        Lpp = self.L_fixed[self.gprime :, self.gprime :]
        return sym((Lpp * self.k_matrix[:, -1]) @ Lpp.T)

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "gprime": self.gprime,
            "L_fixed": self.L_fixed.tolist(),
            "X_fixed": self.X_fixed.tolist(),
            "profiles": [p.to_json() for p in self.profiles],
            "u": self.u,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DegenerationSpec":
        g = int(obj["g"])
        return cls(
            g,
            int(obj["gprime"]),
            np.array(obj.get("L_fixed", np.eye(g)), dtype=float),
            np.array(obj.get("X_fixed", np.zeros((g, g))), dtype=float),
            tuple(Profile.from_json(p) for p in obj["profiles"]),
            float(obj.get("u", DEFAULT_U)),
            int(obj.get("seed", 0)),
        )


def geometric_spec(g: int, gprime: int, rho: float = 3.0, c: float = 20.0, **kw) -> DegenerationSpec:
    """Bounded scales ``1, 1.5, ...`` followed by ``c * 1.5**j * rho**n``."""
    L = kw.pop("L_fixed", np.eye(g))
    X = kw.pop("X_fixed", np.zeros((g, g)))
    profiles = [Profile("constant", 1.0 + 0.5 * i) for i in range(gprime)]
    profiles += [Profile("geometric", c * 1.5**j, rho) for j in range(g - gprime)]
    return DegenerationSpec(g, gprime, L, X, tuple(profiles), **kw)


def scales(spec: DegenerationSpec, n: int) -> np.ndarray:
    return np.array([p.value(n) for p in spec.profiles])


def make_sequence(spec: DegenerationSpec, n: int) -> SiegelPoint:
    if n < 0:
        raise ValidationError("n must be nonnegative")
    d = scales(spec, n)
    u = spec.u
    if not (1.0 < u * d[0] and np.all(d[:-1] < u * d[1:])):
        raise SiegelChainViolated(f"scales {d} break the Siegel chain at n={n}")
    L = spec.L_fixed
    tau = SiegelPoint(spec.X_fixed, sym((L * d) @ L.T))
    assert in_siegel_set(tau, u)
    return tau


# -- ball sampling -----------------------------------------------------------


def _rng(seed: int, n: int, idx: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, n, idx])))


@dataclass(frozen=True)
class BallDraw:
    """A unit product direction (in the standard frames), a radius and fibre
    coordinates."""

    radius: float
    VX: np.ndarray
    VY: np.ndarray
    W: np.ndarray
    fiber: object


def _rand_sym(rng, m):
    A = rng.standard_normal((m, m))
    return sym(A)


def ball_draw(seed: int, n: int, idx: int, g: int, gprime: int, R: float, box: FiberBox) -> BallDraw:
    rng = _rng(seed, n, idx)
    k, gpp = gprime, g - gprime
    VX, VY, W = _rand_sym(rng, k), _rand_sym(rng, k), _rand_sym(rng, gpp)
    norm = np.sqrt(0.5 * (np.sum(VX**2) + np.sum(VY**2) + np.sum(W**2)))
    radius = R * rng.uniform()
    return BallDraw(radius, VX / norm, VY / norm, W / norm, box.sample(rng, g, k))


def _walk_from_identity(VX, VY, s: float) -> SiegelPoint:
    """Euler integration of the constant frame direction ``(VX, VY)`` for time
    ``s`` starting at ``iI``."""
    k = VX.shape[0]
    X, Y = np.zeros((k, k)), np.eye(k)
    speed = np.sqrt(0.5 * (np.sum(VX**2) + np.sum(VY**2)))
    steps = max(1, int(np.ceil(s * speed / WALK_STEP)))
    h = s / steps
    for _ in range(steps):
        w, V = np.linalg.eigh(Y)
        Rt = (V * np.sqrt(w)) @ V.T
        X = sym(X + h * Rt @ VX @ Rt)
        Y = sym(Y + h * Rt @ VY @ Rt)
    return SiegelPoint(X, Y)


def realize_base(draw: BallDraw, center: BasePoint, shrink: float = 1.0) -> BasePoint:
    s = draw.radius * shrink
    Rt = sqrtm(center.t)
    t = trwp_geodesic(center.t, sym(Rt @ draw.W @ Rt), s)
    if center.tauP is None:
        return BasePoint(None, t)
    w = _walk_from_identity(draw.VX, draw.VY, s)
    return BasePoint(act(SymplecticMat.frame(center.tauP), w), t)


def _realize_within(draw: BallDraw, center: BasePoint, R: float) -> BasePoint:
    shrink = 1.0
    for _ in range(200):
        b = realize_base(draw, center, shrink)
        if base_distance(b, center) <= R * (1 + 1e-6):
            return b
        shrink *= 0.98
    raise AssertionError("ball sample could not be pulled inside the ball")


def _ball(tau_n, R, m, seed, gprime, box, n):
    if m < 1 or R < 0:
        raise ValidationError("need m >= 1 and R >= 0")
    g = tau_n.g
    center = project(tau_n, gprime)
    draws, bases, fibers = [None], [center], [fiber_coords(tau_n, gprime)]
    for idx in range(1, m):
        dr = ball_draw(seed, n, idx, g, gprime, R, box)
        draws.append(dr)
        bases.append(_realize_within(dr, center, R))
        fibers.append(dr.fiber)
    return draws, bases, fibers


def sample_ball(
    tau_n: SiegelPoint,
    R: float,
    m: int,
    seed: int = 0,
    gprime: int = 0,
    u: float = DEFAULT_U,
    box: Optional[FiberBox] = None,
    n: int = 0,
) -> list[SiegelPoint]:
    """``m`` points whose base projections lie in the base ball of radius ``R``
    around ``project(tau_n)``; the first is ``tau_n`` itself.

    Sample ``idx`` draws from a generator keyed by ``(seed, n, idx)``.
    """
    box = box or FiberBox.siegel(u, tau_n.g)
    _, bases, fibers = _ball(tau_n, R, m, seed, gprime, box, n)
    return [tau_n] + [assemble(b, f) for b, f in zip(bases[1:], fibers[1:])]


# -- distortion -------------------------------------------------------------


@dataclass(frozen=True)
class DistortionReport:
    n: int
    R: float
    pairs: int
    max_slack: float
    delta_theory: float
    gh_upper_measured: float
    gh_upper_theory: float
    lambda_min: float
    d_gp1: float
    # pairs whose slack exceeds delta_theory (only meaningful when certified)
    violations: int = 0
    certified: bool = True


def pair_slack(tau_p: SiegelPoint, tau_q: SiegelPoint, gprime: int, base_q: Optional[BasePoint] = None) -> float:
    """Length of the vertical leg closing the horizontal lift from ``tau_p``
    to the fibre of ``tau_q``, after lattice reduction inside that fibre."""
    base_q = base_q or project(tau_q, gprime)
    lifted = reduce_in_fiber(transport_to_base(tau_p, base_q, gprime), tau_q, gprime)
    return fiber_path_length(lifted, tau_q, gprime, nodes=2)


def _pair_table(bases, fibers, nodes: int = 2):
    """``(i, j, d_base, slack)`` for every pair; array-level twin of
    :func:`base_distance` and :func:`pair_slack`."""
    frames = [_BaseFrame(b) for b in bases]
    rows = []
    for i in range(len(frames)):
        for j in range(i + 1, len(frames)):
            fj = frames[j]
            lifted = fj.reduce(fj.transport(frames[i], fibers[i]), fibers[j])
            rows.append((i, j, frames[i].distance(fj), fj.path_length(lifted, fibers[j], nodes)))
    return rows


def measure_distortion(
    tau_n: SiegelPoint,
    R: float,
    samples: Sequence[SiegelPoint],
    gprime: int,
    u: float = DEFAULT_U,
    box: Optional[FiberBox] = None,
    n: int = 0,
) -> DistortionReport:
    """Certified interval ``[d_base, d_base + slack]`` for every sampled pair.

    ``max_slack / 2`` bounds the Gromov-Hausdorff distance between the sampled
    ball and its base image.
    """
    bases = [project(s, gprime) for s in samples]
    table = _pair_table(bases, [fiber_coords(s, gprime) for s in samples])
    return _report(tau_n, R, table, gprime, u, box, n)


def _report(tau_n, R, table, gprime, u, box, n) -> DistortionReport:
    max_slack = max((r[3] for r in table), default=0.0)
    lam = lambda_min(project(tau_n, gprime).t)

    d_gp1 = float(siegel_coords(tau_n).d[gprime])
    try:
        cb = collapse_bounds(tau_n, gprime, R, u, box)
        delta, certified = cb.delta, True
        violations = sum(not certified_le(r[3], delta) for r in table)
    except NotDeepEnough:
        delta, certified, violations = float("nan"), False, 0
    return DistortionReport(
        n, float(R), len(table), max_slack, delta, max_slack / 2, delta / 2, lam, d_gp1, violations, certified
    )


# -- rates --------------------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    n_range: tuple


def rate_fit(series: Sequence[tuple[float, float]], n_range: Optional[tuple] = None) -> RateFit:
    """Least-squares fit of ``log value`` against ``log x``."""
    if len(series) < 4:
        raise DegenerateInput("need at least 4 points")
    x = np.array([s[0] for s in series], dtype=float)
    y = np.array([s[1] for s in series], dtype=float)
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise DegenerateInput("abscissae and values must be positive and finite")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise DegenerateInput("all abscissae are equal")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    sst = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / sst if sst > 0 else 1.0
    return RateFit(float(slope), float(intercept), r2, tuple(n_range or (0, len(series) - 1)))


# -- limit comparison ----------------------------------------------------------


@dataclass(frozen=True)
class LimitRow:
    n: int
    d_gp1: float
    t_bar: np.ndarray
    t_bar_error: float
    drift: float
    max_base_gap: float
    max_slack: float
    discrepancy: float


def _limit_row(spec, n, R, draws, bases, table) -> LimitRow:
    d = scales(spec, n)
    t_limit = spec.t_bar_limit()
    limit_center = BasePoint(spec.anchor, t_limit)
    center = bases[0]
    t_bar = center.t / d[-1]
    normalized = [BasePoint(b.tauP, b.t / d[-1]) for b in bases]
    limit_pts = [limit_center] + [_realize_within(dr, limit_center, R) for dr in draws[1:]]
    drift = base_distance(BasePoint(center.tauP, t_bar), limit_center)
    limit_frames = [_BaseFrame(b) for b in limit_pts]
    norm_frames = [_BaseFrame(b) for b in normalized]
    gap = slack_max = worst = 0.0
    for i, j, _, s in table:
        dn = norm_frames[i].distance(norm_frames[j])
        dl = limit_frames[i].distance(limit_frames[j])
        gap = max(gap, abs(dn - dl))
        slack_max = max(slack_max, s)
        worst = max(worst, abs(dn - dl), abs(dn + s - dl))
    return LimitRow(n, float(d[spec.gprime]), t_bar, float(np.linalg.norm(t_bar - t_limit)), drift, gap, slack_max, worst + drift)


def limit_compare(
    spec: DegenerationSpec, R: float, n_list: Sequence[int], m: int, box: Optional[FiberBox] = None
) -> list[LimitRow]:
    """Distance discrepancy between the sampled ball around ``tau_n`` and the
    matching points of the limit product space based at ``(tau'_inf, t_bar_inf)``."""
    if not spec.nondegenerate:
        raise DegenerateDirection("scale ratios do not converge to nonzero limits")
    box = box or FiberBox.siegel(spec.u, spec.g)
    rows = []
    for n in n_list:
        draws, bases, fibers = _ball(make_sequence(spec, n), R, m, spec.seed, spec.gprime, box, n)
        rows.append(_limit_row(spec, n, R, draws, bases, _pair_table(bases, fibers)))
    return rows


# -- full runs -----------------------------------------------------------------

CSV_COLUMNS = (
    "n",
    "d_gp1",
    "lambda_min",
    "fiber_diam_upper",
    "bound_eq42",
    "max_slack",
    "delta_theory",
    "gh_upper",
    "limit_discrepancy",
)


@dataclass
class CollapseReport:
    spec: dict
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)


def experiment_box(spec: DegenerationSpec, tau: SiegelPoint, kind: str) -> FiberBox:
    if kind == "siegel":
        return FiberBox.siegel(spec.u, spec.g)
    if kind == "lattice":
        k = spec.gprime
        return FiberBox.lattice(tau.Y[:k, :k])
    raise ValidationError(f"unknown fibre box {kind!r}")


def run_row(spec: DegenerationSpec, n: int, R: float, m: int, box_kind: str = "lattice", diam_samples: int = 32) -> dict:
    """One report row.  Fibre samples and diameters use the box ``box_kind``;
    the certified slack bound is evaluated for the same box."""
    k = spec.gprime
    tau_n = make_sequence(spec, n)
    box = experiment_box(spec, tau_n, box_kind)
    draws, bases, fibers = _ball(tau_n, R, m, spec.seed, k, box, n)
    table = _pair_table(bases, fibers)
    rep = _report(tau_n, R, table, k, spec.u, box, n)
    base = bases[0]
    row = {
        "n": n,
        "d_gp1": rep.d_gp1,
        "lambda_min": rep.lambda_min,
        "fiber_diam_upper": fiber_diameter_upper(base, k, spec.u, diam_samples, spec.seed, box),
        "bound_eq42": fiber_diameter_bound(base, k, spec.u, box),
        "max_slack": rep.max_slack,
        "delta_theory": rep.delta_theory,
        "gh_upper": rep.gh_upper_measured,
        "limit_discrepancy": float("nan"),
        "R": rep.R,
        "pairs": rep.pairs,
        "gh_upper_theory": rep.gh_upper_theory,
        "violations": rep.violations,
        "certified": rep.certified,
    }
    if spec.nondegenerate:
        row["limit_discrepancy"] = _limit_row(spec, n, R, draws, bases, table).discrepancy
    return row


def _fit_column(rows, col) -> Optional[RateFit]:
    pts = [(r["d_gp1"], r[col]) for r in rows if np.isfinite(r[col]) and r[col] > 0]
    if len(pts) < 4:
        return None
    ns = [r["n"] for r in rows]
    return rate_fit(pts, (min(ns), max(ns)))


def collapse_run(
    spec: DegenerationSpec,
    R: float = 1.0,
    n_values: Sequence[int] = range(1, 13),
    m: int = 40,
    box_kind: str = "lattice",
) -> CollapseReport:
    rows = [run_row(spec, n, R, m, box_kind) for n in n_values]
    fits = {
        "fiber_diam": _fit_column(rows, "fiber_diam_upper"),
        "gh_upper": _fit_column(rows, "gh_upper"),
        "limit_disc": _fit_column(rows, "limit_discrepancy"),
    }
    return CollapseReport(spec.to_json() | {"R": R, "m": m, "box": box_kind}, rows, fits)
