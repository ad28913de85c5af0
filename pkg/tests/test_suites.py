import numpy as np

from wpcollapse.siegel import TangentVec, wp_inner

from wpcollapse.suites import (
    circle_circumference,
    cusp_metric,
    g1_suite,
    g2_chart,
    g2_chart_inverse,
    g2_displayed_tensor,
    g2_pullback_tensor,
    g2_suite,
    property_sweeps,
)


def test_circle_circumference():
    for r in (0.0, 1.0, np.log(100.0), 5.0, 10.0):
        assert abs(circle_circumference(r) - np.exp(-r) / np.sqrt(2)) <= 1e-10 * max(1.0, np.exp(-r))
    assert np.isclose(cusp_metric(0.0, 1.0, 0.0), 0.5)


def test_g2_chart_round_trip_and_tensor():
    rng = np.random.default_rng(5)
    for _ in range(20):
        theta = rng.uniform(-0.5, 0.5, 4)
        r = rng.uniform(0.5, 4.0, 2)
        th, rr = g2_chart_inverse(g2_chart(theta, r))
        assert np.allclose(th, theta) and np.allclose(rr, r)
        A, B = g2_pullback_tensor(theta, r), g2_displayed_tensor(theta, r)
        assert np.abs(A - B).max() <= 1e-9 * np.abs(A).max()
        # chart velocities by central differences, metric from the Siegel module
        tau, h = g2_chart(theta, r), 1e-6
        z = np.concatenate([theta, r])
        vel = []
        for i in range(6):
            e = np.zeros(6)
            e[i] = h
            p, m = g2_chart((z + e)[:4], (z + e)[4:]), g2_chart((z - e)[:4], (z - e)[4:])
            vel.append(TangentVec((p.X - m.X) / (2 * h), (p.Y - m.Y) / (2 * h)))
        G = np.array([[wp_inner(tau, a, b) for b in vel] for a in vel])
        assert np.abs(G - A).max() <= 1e-6 * np.abs(A).max()


def test_suites_pass():
    for rep in (g1_suite(), g2_suite(), property_sweeps()):
        assert rep.passed, [c for c in rep.checks if not c.passed]
