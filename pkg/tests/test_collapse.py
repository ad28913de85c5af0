import numpy as np
import pytest

from wpcollapse.collapse import (
    DegenerationSpec,
    Profile,
    _ball,
    _pair_table,
    collapse_run,
    experiment_box,
    geometric_spec,
    limit_compare,
    make_sequence,
    measure_distortion,
    pair_slack,
    rate_fit,
    run_row,
    sample_ball,
    scales,
)
from wpcollapse.errors import DegenerateDirection, DegenerateInput, SiegelChainViolated, ValidationError
from wpcollapse.horo import FiberBox, base_distance, collapse_bounds, fiber_coords, project
from wpcollapse.linalg import certified_le, lambda_min
from wpcollapse.reduction import in_siegel_set, siegel_coords


def spec_g3(d2=(1.0, 3.0), d3=(2.0, 3.0), **kw):
    profiles = (Profile("constant", 1.0), Profile("geometric", *d2), Profile("geometric", *d3))
    return DegenerationSpec(3, 1, np.eye(3), np.zeros((3, 3)), profiles, **kw)


def test_profiles():
    assert Profile("constant", 2.0).value(7) == 2.0
    assert Profile("geometric", 2.0, 3.0).value(2) == 18.0
    p = Profile("mixed", 1.0, 0.5, 3.0)
    assert p.value(1) == 3.5 and p.convergent and p.limit() == 3.0
    assert Profile("geometric", 1.0, 3.0).divergent
    assert Profile.from_json(Profile("mixed", 1.0, 2.0, 0.5).to_json()) == Profile("mixed", 1.0, 2.0, 0.5)
    with pytest.raises(ValidationError):
        Profile("cubic", 1.0)
    with pytest.raises(ValidationError):
        Profile("geometric", -1.0, 2.0)


def test_spec_examples():
    s = DegenerationSpec(2, 1, np.eye(2), np.zeros((2, 2)),
                         (Profile("constant", 2.0), Profile("geometric", 2.0, 3.0)))
    assert s.nondegenerate and np.allclose(s.k_matrix, [[1.0]])
    s = spec_g3()
    assert s.nondegenerate
    assert s.k_matrix[0, 1] == 0.5
    assert np.allclose(s.t_bar_limit(), np.diag([0.5, 1.0]), atol=1e-15)
    d = spec_g3(d2=(1.0, 2.0), d3=(1.0, 4.0))
    assert not d.nondegenerate
    with pytest.raises(DegenerateDirection):
        d.t_bar_limit()
    with pytest.raises(DegenerateDirection):
        limit_compare(d, 1.0, [1, 2], 4)
    # collapse bounds still certify the decay along a degenerate direction
    gh = [collapse_bounds(make_sequence(d, n), 1, 1.0).gh_upper for n in (4, 6, 8, 10)]
    assert all(b < a for a, b in zip(gh, gh[1:]))


def test_spec_validation():
    with pytest.raises(ValidationError):
        DegenerationSpec(2, 1, np.eye(2), np.zeros((2, 2)),
                         (Profile("geometric", 1.0, 2.0), Profile("geometric", 1.0, 3.0)))
    with pytest.raises(ValidationError):
        DegenerationSpec(2, 1, [[1.0, 0.0], [2.5, 1.0]], np.zeros((2, 2)),
                         (Profile("constant", 1.0), Profile("geometric", 1.0, 3.0)))
    s = geometric_spec(3, 1, seed=4)
    assert DegenerationSpec.from_json(s.to_json()).to_json() == s.to_json()


def test_make_sequence():
    s = spec_g3()
    for n in range(1, 10):
        tau = make_sequence(s, n)
        assert in_siegel_set(tau, 2.0)
        assert np.allclose(siegel_coords(tau).d, [1, 3.0**n, 2 * 3.0**n])
        assert project(tau, 1).tauP == s.anchor
    # d_1 = 0.4 breaks 1 < u d_1
    bad = DegenerationSpec(2, 1, np.eye(2), np.zeros((2, 2)),
                           (Profile("constant", 0.4), Profile("geometric", 1.0, 3.0)))
    with pytest.raises(SiegelChainViolated):
        make_sequence(bad, 1)
    with pytest.raises(ValidationError):
        make_sequence(s, -1)


def test_sample_ball():
    s = geometric_spec(3, 1)
    tau = make_sequence(s, 6)
    assert sample_ball(tau, 0.0, 1) == [tau]
    box = experiment_box(s, tau, "lattice")
    c = project(tau, 1)
    for R in (0.5, 1.0, 2.0):
        pts = sample_ball(tau, R, 12, seed=3, gprime=1, box=box, n=6)
        assert pts[0] == tau
        floor = siegel_coords(tau).d[1] * np.exp(-np.sqrt(2) * R)
        for p in pts:
            assert base_distance(project(p, 1), c) <= R * (1 + 1e-6)
            # depth survives with margin exp(sqrt 2 R); Siegel-set membership
            # of ball points is not guaranteed
            assert siegel_coords(p).d[1] > floor
    assert sample_ball(tau, 1.0, 12, seed=3, gprime=1) == sample_ball(tau, 1.0, 12, seed=3, gprime=1)
    assert sample_ball(tau, 1.0, 12, seed=4, gprime=1) != sample_ball(tau, 1.0, 12, seed=3, gprime=1)


def test_one_fibre_slack_is_path_length():
    tau = make_sequence(geometric_spec(2, 1), 3)
    base = project(tau, 1)
    fibers = [fiber_coords(tau, 1), FiberBox(0.5, 0.5, 0.5).sample(np.random.default_rng(1), 2, 1)]
    (i, j, d, s), = _pair_table([base, base], fibers)
    assert d <= 1e-7 and s > 0


def test_pair_table_matches_public_path():
    for g, k in ((2, 1), (3, 1), (3, 0)):
        spec = geometric_spec(g, k)
        tau = make_sequence(spec, 4)
        box = experiment_box(spec, tau, "lattice")
        pts = sample_ball(tau, 1.0, 6, seed=2, gprime=k, box=box, n=4)
        table = _pair_table([project(p, k) for p in pts], [fiber_coords(p, k) for p in pts])
        for i, j, d, s in table:
            assert np.isclose(d, base_distance(project(pts[i], k), project(pts[j], k)), rtol=1e-9, atol=1e-12)
            assert np.isclose(s, pair_slack(pts[i], pts[j], k), rtol=1e-9, atol=1e-12)


def test_measure_distortion_sandwich():
    for g, k in ((2, 1), (3, 1), (2, 0)):
        spec = geometric_spec(g, k)
        tau = make_sequence(spec, 5)
        box = experiment_box(spec, tau, "lattice")
        pts = sample_ball(tau, 1.0, 10, gprime=k, box=box, n=5)
        rep = measure_distortion(tau, 1.0, pts, k, box=box, n=5)
        assert rep.certified and rep.violations == 0
        assert certified_le(rep.max_slack, rep.delta_theory)
        assert rep.gh_upper_measured == rep.max_slack / 2
        assert rep.pairs == 45


def test_not_deep_enough_is_reported_uncertified():
    spec = geometric_spec(2, 1, c=1.0)
    tau = make_sequence(spec, 0)
    rep = measure_distortion(tau, 2.0, sample_ball(tau, 2.0, 4, gprime=1), 1)
    assert not rep.certified and np.isnan(rep.delta_theory)


def test_rate_fit_synthetic():
    x = 3.0 ** np.arange(1, 9)
    f = rate_fit(list(zip(x, 5 * x**-0.5)))
    assert f.slope == pytest.approx(-0.5, abs=1e-12) and f.r_squared == pytest.approx(1.0, abs=1e-12)
    assert rate_fit(list(zip(x, 2 / x))).slope == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(DegenerateInput):
        rate_fit([(2.0, 1.0)] * 5)
    with pytest.raises(DegenerateInput):
        rate_fit([(1.0, 1.0), (2.0, 1.0)])
    with pytest.raises(DegenerateInput):
        rate_fit([(1.0, 1.0), (2.0, -1.0), (3.0, 1.0), (4.0, 1.0)])


def test_fibre_diameter_rate_g2():
    rep = collapse_run(geometric_spec(2, 1), R=1.0, n_values=range(1, 9), m=6)
    assert -0.55 <= rep.fits["fiber_diam"].slope <= -0.45


def test_limit_compare_constant_normalization():
    # t_n / d_g is the same at every n, so only fibre slack remains
    spec = geometric_spec(3, 1)
    rows = limit_compare(spec, 1.0, [3, 5], 6)
    for r in rows:
        assert r.drift <= 1e-12 and r.t_bar_error <= 1e-12
        assert r.max_base_gap <= 1e-9
        assert abs(r.discrepancy - r.max_slack) <= 1e-9
    assert np.allclose(spec.t_bar_limit(), np.diag([1 / 1.5, 1.0]))


def test_limit_compare_converging_anchor():
    profiles = (Profile("mixed", 1.0, 0.5, 1.0), Profile("geometric", 1.0, 3.0), Profile("geometric", 2.0, 3.0))
    spec = DegenerationSpec(3, 1, np.eye(3), np.zeros((3, 3)), profiles)
    rows = limit_compare(spec, 1.0, [2, 4, 6, 8], 6)
    drift = [r.drift for r in rows]
    assert all(b < a for a, b in zip(drift, drift[1:]))
    assert all(r.discrepancy >= r.max_slack - 1e-12 for r in rows)


def test_run_row_reproducible_and_monotone():
    spec = geometric_spec(2, 1, seed=7)
    a, b = run_row(spec, 4, 1.0, 8), run_row(spec, 4, 1.0, 8)
    assert a == b or all((a[k] == b[k]) or (np.isnan(a[k]) and np.isnan(b[k])) for k in a)
    slack = [run_row(spec, n, 1.0, 8)["max_slack"] for n in range(3, 10)]
    assert all(s1 <= s0 * 1.05 for s0, s1 in zip(slack, slack[1:]))


def test_run_row_certified_bounds():
    for g, k in ((2, 1), (3, 1), (2, 0), (3, 0)):
        spec = geometric_spec(g, k)
        row = run_row(spec, 3, 1.0, 6)
        assert row["certified"] and row["violations"] == 0
        assert certified_le(row["fiber_diam_upper"], row["bound_eq42"])
        assert certified_le(row["max_slack"], row["delta_theory"])
        tau = make_sequence(spec, 3)
        assert row["lambda_min"] == lambda_min(project(tau, k).t)
        assert row["d_gp1"] == scales(spec, 3)[k]


def test_ball_rng_is_keyed_per_sample():
    spec = geometric_spec(2, 1)
    tau = make_sequence(spec, 2)
    box = FiberBox(0.5, 0.5, 0.5)
    d1, b1, f1 = _ball(tau, 1.0, 5, 0, 1, box, 2)
    d2, b2, f2 = _ball(tau, 1.0, 8, 0, 1, box, 2)
    # growing m keeps the first samples unchanged
    for x, y in zip(f1, f2):
        assert np.array_equal(x.vector(), y.vector())
