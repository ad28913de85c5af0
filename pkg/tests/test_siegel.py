import numpy as np
import pytest
import scipy.linalg
import scipy.optimize
from hypothesis import given, strategies as st

from conftest import spd, sym_rand
from wpcollapse.errors import NotPositiveDefinite, SamplesTooCoarse
from wpcollapse.siegel import (
    J_matrix,
    SiegelPoint,
    SymplecticMat,
    TangentVec,
    act,
    cross_ratio_eigenvalues,
    curve_length,
    is_symplectic,
    point_from_json,
    point_to_json,
    potential_hessian_check,
    push_forward,
    siegel_distance,
    symplectic_from_json,
    symplectic_to_json,
    wp_norm_sq,
)


def rand_point(rng, g):
    return SiegelPoint(sym_rand(rng, g), spd(rng, g))


def rand_tangent(rng, g):
    return TangentVec(sym_rand(rng, g), sym_rand(rng, g))


def rand_sp(rng, g, scale=0.4):
    # exp of a Hamiltonian matrix J S is symplectic
    S = sym_rand(rng, 2 * g) * scale
    return SymplecticMat.from_matrix(scipy.linalg.expm(J_matrix(g) @ S))


def hyperbolic(z, w):
    # distance for the metric (dx^2 + dy^2) / (2 y^2)
    return np.arccosh(1 + abs(z - w) ** 2 / (2 * z.imag * w.imag)) / np.sqrt(2)


def test_is_symplectic_examples():
    assert is_symplectic(np.eye(4))
    assert is_symplectic(J_matrix(2))
    M = np.eye(4)
    M[0, 1] = 0.1
    assert not is_symplectic(M)


def test_act_examples():
    inv = SymplecticMat.from_matrix([[0.0, -1.0], [1.0, 0.0]])
    assert act(inv, SiegelPoint.from_complex([[2j]])) == SiegelPoint.from_complex([[0.5j]])
    assert act(inv, SiegelPoint.identity(1)) == SiegelPoint.identity(1)
    V = push_forward(inv, SiegelPoint.identity(1), TangentVec([[1.0]], [[0.0]]))
    assert np.allclose(V.complex, [[-1.0]])


def test_group_action_composes(rng):
    for g in range(1, 5):
        M1, M2, tau = rand_sp(rng, g), rand_sp(rng, g), rand_point(rng, g)
        a = act(M1 @ M2, tau).tau
        b = act(M1, act(M2, tau)).tau
        assert np.abs(a - b).max() <= 1e-10 * (1 + np.abs(a).max())


def test_push_forward_finite_difference(rng):
    h = 1e-6
    for g in range(1, 4):
        M, tau, V = rand_sp(rng, g), rand_point(rng, g), rand_tangent(rng, g)
        step = V.complex * h
        plus = act(M, SiegelPoint.from_complex(tau.tau + step)).tau
        minus = act(M, SiegelPoint.from_complex(tau.tau - step)).tau
        fd = (plus - minus) / (2 * h)
        W = push_forward(M, tau, V).complex
        assert np.abs(fd - W).max() <= 1e-5 * np.abs(W).max()


def test_wp_norm_closed_forms(rng):
    VX, VY = sym_rand(rng, 3), sym_rand(rng, 3)
    expect = 0.5 * (np.trace(VX @ VX) + np.trace(VY @ VY))
    assert np.isclose(wp_norm_sq(SiegelPoint.identity(3), TangentVec(VX, VY)), expect, rtol=1e-14)
    for y in (0.3, 1.0, 7.0):
        tau = SiegelPoint([[1.3]], [[y]])
        assert np.isclose(wp_norm_sq(tau, TangentVec([[1.0]], [[0.0]])), 1 / (2 * y * y), rtol=1e-14)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_metric_invariance(g, seed):
    rng = np.random.default_rng(seed)
    M, tau, V = rand_sp(rng, g), rand_point(rng, g), rand_tangent(rng, g)
    a = wp_norm_sq(tau, V)
    b = wp_norm_sq(act(M, tau), push_forward(M, tau, V))
    assert abs(a - b) <= 1e-9 * a


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_wp_norm_positive_definite(g, seed):
    rng = np.random.default_rng(seed)
    tau, V = rand_point(rng, g), rand_tangent(rng, g)
    V = V * (1 / np.sqrt(V.frob_sq()))
    # |V|^2 >= lambda_min(Y^{-1})^2 ||V||_F^2 / 2
    eps = 0.5 / np.linalg.eigvalsh(tau.Y)[-1] ** 2
    assert wp_norm_sq(tau, V) >= eps * (1 - 1e-12)


def test_potential_hessian(rng):
    assert potential_hessian_check(SiegelPoint.identity(1)) <= 1e-6
    assert potential_hessian_check(SiegelPoint.identity(2)) <= 1e-5
    for _ in range(5):
        assert potential_hessian_check(rand_point(rng, int(rng.integers(1, 4)))) <= 1e-5


def test_distance_examples():
    i = SiegelPoint.identity(1)
    assert siegel_distance(i, i) == 0.0
    assert np.isclose(siegel_distance(i, SiegelPoint([[0.0]], [[np.e**2]])), np.sqrt(2), rtol=1e-14)


@given(st.complex_numbers(max_magnitude=20), st.complex_numbers(max_magnitude=20))
def test_distance_matches_hyperbolic(z, w):
    z = complex(z.real, abs(z.imag) + 0.05)
    w = complex(w.real, abs(w.imag) + 0.05)
    d = siegel_distance(SiegelPoint.from_complex([[z]]), SiegelPoint.from_complex([[w]]))
    assert np.isclose(d, hyperbolic(z, w), rtol=1e-9, atol=1e-12)


def test_distance_on_flat_and_moved(rng):
    # on the diagonal flat the metric is (1/2) sum dlog(y_k)^2
    for g in range(1, 5):
        a = rng.uniform(-2, 2, g)
        tau1, tau2 = SiegelPoint.identity(g), SiegelPoint(np.zeros((g, g)), np.diag(np.exp(a)))
        expect = np.sqrt(0.5 * np.sum(a**2))
        assert np.isclose(siegel_distance(tau1, tau2), expect, rtol=1e-12)
        M = rand_sp(rng, g)
        assert np.isclose(siegel_distance(act(M, tau1), act(M, tau2)), expect, rtol=1e-8)


def test_cross_ratio_eigenvalues_direct(rng):
    for g in range(1, 4):
        t1, t2 = rand_point(rng, g).tau, rand_point(rng, g).tau
        inv = np.linalg.inv
        R = (t1 - t2) @ inv(t1 - t2.conj()) @ (t1.conj() - t2.conj()) @ inv(t1.conj() - t2)
        expect = np.sort(np.linalg.eigvals(R).real)
        got = cross_ratio_eigenvalues(SiegelPoint.from_complex(t1), SiegelPoint.from_complex(t2))
        assert np.allclose(got, expect, atol=1e-10)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_isometry_and_triangle(g, seed):
    rng = np.random.default_rng(seed)
    p, q, r = rand_point(rng, g), rand_point(rng, g), rand_point(rng, g)
    M = rand_sp(rng, g)
    d = siegel_distance(p, q)
    assert abs(siegel_distance(act(M, p), act(M, q)) - d) <= 1e-8 * (1 + d)
    assert d <= siegel_distance(p, r) + siegel_distance(r, q) + 1e-9
    assert np.isclose(d, siegel_distance(q, p), rtol=1e-10)


def test_harish_chandra_bounded(rng):
    for g in range(1, 5):
        Z = rand_point(rng, g).harish_chandra()
        assert np.linalg.eigvalsh(np.eye(g) - Z @ Z.conj().T)[0] > 1e-12


def _path_energy_length(g, N, p, q):
    """Length of a piecewise-linear path with free interior knots; Y is
    parametrized by a Cholesky factor so every knot stays in the space."""
    iu = np.tril_indices(g)
    nx = g * (g + 1) // 2

    def unpack(z):
        X = np.zeros((g, g))
        X[iu] = z[:nx]
        X = X + np.tril(X, -1).T
        C = np.zeros((g, g))
        C[iu] = z[nx:]
        C[np.diag_indices(g)] = np.exp(np.diag(C))
        return X, C @ C.T

    def pack(tau):
        C = np.linalg.cholesky(tau.Y)
        C[np.diag_indices(g)] = np.log(np.diag(C))
        return np.concatenate([tau.X[iu], C[iu]])

    zp, zq = pack(p), pack(q)
    s = np.linspace(0, 1, N + 1)[1:-1, None]
    z0 = ((1 - s) * zp + s * zq).ravel()

    def segments(z):
        knots = [(p.X, p.Y)] + [unpack(w) for w in z.reshape(N - 1, -1)] + [(q.X, q.Y)]
        X = np.array([k[0] for k in knots])
        Y = np.array([k[1] for k in knots])
        Yi = np.linalg.inv(0.5 * (Y[1:] + Y[:-1]))
        dX, dY = Yi @ np.diff(X, axis=0), Yi @ np.diff(Y, axis=0)
        sq = 0.5 * (np.einsum("nij,nji->n", dX, dX) + np.einsum("nij,nji->n", dY, dY))
        return np.sqrt(np.maximum(sq, 0.0))

    # energy is minimized by constant-speed geodesics, which keeps the
    # problem well conditioned; report the length of the minimizer
    res = scipy.optimize.minimize(lambda z: N * np.sum(segments(z) ** 2), z0, method="L-BFGS-B",
                                  options={"maxiter": 2000, "ftol": 1e-15, "gtol": 1e-10})
    return float(np.sum(segments(res.x)))


@pytest.mark.slow
def test_distance_is_minimal_path_length(rng):
    for g, N in ((1, 64), (2, 32)):
        p, q = rand_point(rng, g), rand_point(rng, g)
        d = siegel_distance(p, q)
        L = _path_energy_length(g, N, p, q)
        assert L >= d * (1 - 1e-6)
        assert (L - d) / d <= 1e-3


def test_curve_length():
    const = [SiegelPoint.identity(2)] * 5
    assert curve_length(const) == 0.0
    errs = []
    for N in (16, 32, 64):
        path = [SiegelPoint([[0.0]], [[y]]) for y in np.linspace(1, np.e, N + 1)]
        errs.append(abs(curve_length(path) - 1 / np.sqrt(2)))
    assert errs[-1] < 1e-4
    assert 3.5 < errs[0] / errs[1] < 4.5 and 3.5 < errs[1] / errs[2] < 4.5
    with pytest.raises(SamplesTooCoarse):
        curve_length([SiegelPoint.identity(1), SiegelPoint([[0.0]], [[np.e]])])


def test_json_round_trip(rng):
    tau = rand_point(rng, 3)
    assert point_from_json(point_to_json(tau)) == tau
    M = rand_sp(rng, 2)
    assert np.array_equal(symplectic_from_json(symplectic_to_json(M)).matrix, M.matrix)
    with pytest.raises(NotPositiveDefinite):
        SiegelPoint(np.zeros((2, 2)), np.diag([1.0, -1.0]))
