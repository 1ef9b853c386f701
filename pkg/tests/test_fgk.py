import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from fuzzyembed.core import SolverError, crisp_matrix, validate_membership
from fuzzyembed.fcm import FcmConfig, fcm_fit, fcm_objective
from fuzzyembed.fgk import (FgkConfig, NormMatrixError, fgk_fit, fgk_objective,
                            fuzzy_covariance, gk_distance2, norm_matrix,
                            regularize_covariance)


# -- distance -------------------------------------------------------------

def test_identity_norm_is_euclidean():
    assert gk_distance2([1.0, 2.0, 3.0], [0.0, 0.0, 1.0], np.eye(3)) == pytest.approx(9.0)


def test_zero_displacement():
    A = np.array([[2.0, 0.3], [0.3, 1.0]])
    assert gk_distance2([4.0, 4.0], [4.0, 4.0], A) == 0.0


def test_distance_hand_value():
    assert gk_distance2([1.0, 1.0], [0.0, 0.0], np.diag([2.0, 1.0])) == pytest.approx(3.0)


def test_distance_rejects_bad_norms():
    with pytest.raises(ValueError):
        gk_distance2([1.0, 0.0], [0.0, 0.0], [[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ValueError):
        gk_distance2([1.0, 0.0], [0.0, 0.0], [[np.inf, 0.0], [0.0, 1.0]])


# -- covariance -----------------------------------------------------------

def test_covariance_of_two_point_cluster():
    X = np.array([[-1.0, 0.0], [1.0, 0.0], [5.0, 5.0]])
    U = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    C = fuzzy_covariance(X, U, [0.0, 0.0], 0, 2.0)
    np.testing.assert_allclose(C, [[1.0, 0.0], [0.0, 0.0]], atol=1e-15)


def test_covariance_of_point_at_center():
    C = fuzzy_covariance([[2.0, 3.0]], [[1.0, 0.0]], [2.0, 3.0], 0, 1.1)
    np.testing.assert_array_equal(C, np.zeros((2, 2)))


def test_covariance_zero_mass():
    with pytest.raises(ValueError):
        fuzzy_covariance([[0.0], [1.0]], [[1.0, 0.0], [1.0, 0.0]], [0.0], 1, 2.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 12), st.integers(1, 8))
def test_covariance_symmetric_psd(seed, n, d):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d)) * rng.uniform(0.1, 10)
    U = rng.dirichlet(np.ones(3), size=n)
    C = fuzzy_covariance(X, U, rng.standard_normal(d), 1, 1.7)
    np.testing.assert_allclose(C, C.T, atol=1e-12)
    assert np.linalg.eigvalsh(C).min() >= -1e-10 * max(1.0, np.trace(C))


# -- regularization -------------------------------------------------------

def test_regularize_identity_case():
    C = np.array([[2.0, 0.5], [0.5, 1.0]])
    np.testing.assert_array_equal(regularize_covariance(C, 0.0), C)


def test_regularize_hand_value():
    np.testing.assert_allclose(regularize_covariance([[1.0, 0.0], [0.0, 0.0]], 0.5),
                               [[0.75, 0.0], [0.0, 0.25]])


def test_regularize_zero_matrix():
    np.testing.assert_array_equal(regularize_covariance(np.zeros((3, 3)), 0.1), 1e-9 * np.eye(3))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 10), st.floats(1e-6, 0.99))
def test_regularized_eigenvalue_floor(seed, d, gamma):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((d, max(1, d // 2)))
    C = B @ B.T
    R = regularize_covariance(C, gamma)
    floor = gamma * np.trace(C) / d
    assert np.linalg.eigvalsh(R).min() >= floor * (1 - 1e-9)


# -- norm matrix ----------------------------------------------------------

@pytest.mark.parametrize("d", [1, 2, 5, 50])
def test_norm_of_identity(d):
    np.testing.assert_allclose(norm_matrix(np.eye(d), 1.0), np.eye(d), atol=1e-14)


def test_norm_hand_values():
    np.testing.assert_allclose(norm_matrix(np.diag([4.0, 1.0]), 1.0), np.diag([0.5, 2.0]))
    A = norm_matrix(np.diag([4.0, 1.0]), 16.0)
    np.testing.assert_allclose(A, np.diag([2.0, 8.0]))
    assert np.linalg.det(A) == pytest.approx(16.0)


def test_norm_rejects_singular():
    with pytest.raises(NormMatrixError):
        norm_matrix([[1.0, 0.0], [0.0, 0.0]], 1.0)
    with pytest.raises(NormMatrixError):
        norm_matrix([[1.0, 2.0], [2.0, 1.0]], 1.0)


def test_norm_rejects_ill_conditioned():
    # positive definite, so Cholesky passes, but the inverse is unreliable
    with pytest.raises(NormMatrixError, match="ill-conditioned"):
        norm_matrix(np.diag([1.0, 1e-12]), 1.0)
    norm_matrix(np.diag([1.0, 1e-6]), 1.0)


def test_default_shrinkage_stays_well_conditioned():
    # rank-one covariance in 300 dims: worst case for the shrinkage
    v = np.random.default_rng(0).standard_normal(300)
    A = norm_matrix(regularize_covariance(np.outer(v, v), 1e-4), 1.0)
    sign, logdet = np.linalg.slogdet(A)
    assert sign > 0 and abs(logdet) <= 1e-6


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 300), st.floats(0.01, 100.0))
def test_norm_determinant_is_volume(seed, d, rho):
    # includes dimensions where det(C) itself underflows float64
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((d, d + 2)) * 0.05
    C = B @ B.T + 1e-3 * np.eye(d)
    A = norm_matrix(C, rho)
    sign, logdet = np.linalg.slogdet(A)
    assert sign == 1.0
    assert np.expm1(logdet - np.log(rho)) == pytest.approx(0.0, abs=1e-6)
    np.testing.assert_allclose(A, A.T, atol=1e-8 * np.abs(A).max())


# -- objective ------------------------------------------------------------

def test_identity_norms_match_fcm_objective(rng):
    X = rng.standard_normal((25, 4))
    V = rng.standard_normal((3, 4))
    U = rng.dirichlet(np.ones(3), size=25)
    got = fgk_objective(X, V, U, [np.eye(4)] * 3, 1.6)
    assert got == pytest.approx(fcm_objective(X, V, U, 1.6), rel=1e-10)


def test_gk_objective_zero_for_points_on_centers():
    X = np.array([[0.0, 1.0], [5.0, 5.0]])
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    assert fgk_objective(X, X, np.eye(2), [A, A], 1.1) == 0.0


def test_gk_objective_hand_value():
    # the 1-D two-point example embedded in the plane; A = diag(2, 1) doubles x-distances
    X = np.array([[0.0, 0.0], [2.0, 0.0]])
    U = np.array([[0.8, 0.2], [0.2, 0.8]])
    A = np.diag([2.0, 1.0])
    assert fgk_objective(X, X, U, [A, A], 2.0) == pytest.approx(0.64, abs=1e-15)


# -- one iteration by hand ------------------------------------------------

def test_first_iteration_against_hand_computation():
    X = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [5.0, 5.0]])
    U0 = crisp_matrix([0, 0, 0, 1], 2)
    states = []
    fgk_fit(X, FgkConfig(c=2, m=2.0, cov_reg=0.0, max_iter=1),
            init=U0, callback=lambda *s: states.append(s))
    t, V, U, J, norms, fallback = states[0]

    np.testing.assert_allclose(V, [[2 / 3, 2 / 3], [5.0, 5.0]], atol=1e-15)
    # cluster 0: C = [[8/9, -4/9], [-4/9, 8/9]], det = 16/27, C^-1 = [[1.5, .75], [.75, 1.5]]
    scale = np.sqrt(16 / 27)
    A0 = scale * np.array([[1.5, 0.75], [0.75, 1.5]])
    # cluster 1 is a single point: zero covariance floors to 1e-9 I, whose norm is I
    np.testing.assert_allclose(norms[0], A0, rtol=1e-12)
    np.testing.assert_allclose(norms[1], np.eye(2), rtol=1e-12)
    assert not fallback.any()

    def q(r, A):
        r = np.asarray(r)
        return r @ A @ r

    D2 = np.array([
        [q([-2 / 3, -2 / 3], A0), 50.0],
        [q([4 / 3, -2 / 3], A0), 34.0],
        [q([-2 / 3, 4 / 3], A0), 34.0],
        [q([13 / 3, 13 / 3], A0), 0.0],
    ])
    assert D2[3, 0] == pytest.approx(84.5 * scale)
    expected = np.empty_like(D2)
    expected[:3] = (1 / D2[:3]) / (1 / D2[:3]).sum(axis=1, keepdims=True)
    expected[3] = [0.0, 1.0]
    np.testing.assert_allclose(U, expected, rtol=1e-12)
    assert J == pytest.approx(np.sum(expected ** 2 * D2), rel=1e-12)


# -- full runs ------------------------------------------------------------

def _blob_data(seed, n, d, c, spread=6.0):
    rng = np.random.default_rng(seed)
    centers = rng.uniform(-spread, spread, size=(c, d))
    A = rng.standard_normal((c, d, d)) * 0.5 + np.eye(d)
    labels = rng.integers(0, c, n)
    return centers[labels] + np.einsum("kij,kj->ki", A[labels], rng.standard_normal((n, d)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(12, 40), d=st.integers(1, 3),
       c=st.integers(2, 3), m=st.sampled_from([1.5, 2.0]),
       rho=st.floats(0.2, 5.0))
@example(seed=0, n=12, d=2, c=3, m=1.5, rho=1.0)  # a cluster collapses onto a line
def test_invariants_every_iteration(seed, n, d, c, m, rho):
    X = _blob_data(seed, n, d, c)
    log = []
    model = fgk_fit(X, FgkConfig(c=c, m=m, seed=seed, cov_reg=0.0, tol=1e-9, rho=(rho,) * c),
                    callback=lambda *s: log.append(s))
    for t, V, U, J, norms, fallback in log:
        assert validate_membership(U) is None
        for A, fb in zip(norms, fallback):
            np.testing.assert_allclose(A, A.T, atol=1e-8)
            if not fb:
                sign, logdet = np.linalg.slogdet(A)
                assert sign > 0 and abs(np.expm1(logdet - np.log(rho))) <= 1e-6
    trace = model.objective_trace
    for k in range(1, len(trace)):
        t = k + 1
        if t in model.fallback_iterations or t - 1 in model.fallback_iterations:
            continue
        assert trace[k] <= trace[k - 1] + 1e-9 * max(1.0, abs(trace[k - 1]))


def test_determinant_constraint_in_high_dimension():
    # fewer points per cluster than dimensions: regularization carries the run
    X = np.random.default_rng(0).standard_normal((60, 80))
    seen = []

    def check(t, V, U, J, norms, fallback):
        for A, fb in zip(norms, fallback):
            if not fb:
                seen.append(np.linalg.slogdet(A))

    model = fgk_fit(X, FgkConfig(c=4, m=1.1, seed=3), callback=check)
    assert model.fallback_events == 0
    assert seen and all(sign > 0 and abs(logdet) <= 1e-6 for sign, logdet in seen)


def _same_partition(a, b):
    pairs = set(zip(a.tolist(), b.tolist()))
    return len(pairs) == len(set(a.tolist())) == len(set(b.tolist()))


def test_spherical_blobs_agree_with_fcm():
    rng = np.random.default_rng(21)
    X = np.vstack([rng.standard_normal((30, 2)), rng.standard_normal((30, 2)) + [8.0, 0.0]])
    fcm = fcm_fit(X, FcmConfig(c=2, m=2.0, seed=4)).harden()
    gk = fgk_fit(X, FgkConfig(c=2, m=2.0, seed=4)).harden()
    assert _same_partition(fcm, gk)


def parallel_lines(seed=7):
    rng = np.random.default_rng(seed)
    x = np.linspace(0.0, 10.0, 20)
    X = np.vstack([np.c_[x, 0.05 * rng.standard_normal(20)],
                   np.c_[x, 1.0 + 0.05 * rng.standard_normal(20)]])
    return X, np.repeat([0, 1], 20)


def _gk_objective_of_labels(X, labels, m=2.0):
    """GK objective of a crisp labelling with its optimal centers and norms."""
    U = crisp_matrix(labels, 2)
    V = np.stack([X[labels == i].mean(axis=0) for i in range(2)])
    norms = [norm_matrix(fuzzy_covariance(X, U, V[i], i, m), 1.0) for i in range(2)]
    return fgk_objective(X, V, U, norms, m)


def test_gk_recovers_parallel_lines_fcm_does_not():
    X, truth = parallel_lines()
    fcm = fcm_fit(X, FcmConfig(c=2, m=2.0, seed=0)).harden()
    gk = fgk_fit(X, FgkConfig(c=2, m=2.0, seed=0)).harden()
    assert not _same_partition(fcm, truth)
    assert _same_partition(gk, truth)
    left_right = (X[:, 0] > 5.0).astype(int)
    assert _gk_objective_of_labels(X, truth) < _gk_objective_of_labels(X, left_right)
    assert _gk_objective_of_labels(X, truth) < _gk_objective_of_labels(X, fcm)


def test_persistent_fallback_aborts():
    # collinear points, no regularization: every covariance is singular
    X = np.c_[np.linspace(0.0, 1.0, 30), np.zeros(30)]
    with pytest.raises(SolverError, match="fallback"):
        fgk_fit(X, FgkConfig(c=2, m=2.0, seed=0, cov_reg=0.0, tol=1e-14))


def test_fallback_counted():
    # one collinear cluster among non-degenerate ones
    rng = np.random.default_rng(2)
    X = np.vstack([rng.standard_normal((30, 2)) + [20.0, 0.0],
                   np.c_[np.linspace(-1, 1, 30), np.zeros(30)]])
    init = crisp_matrix(np.repeat([0, 1], 30), 2)
    model = fgk_fit(X, FgkConfig(c=2, m=2.0, cov_reg=0.0, max_iter=3), init=init)
    assert model.fallback_events >= 1
    assert model.fallback_iterations[0] == 1
    assert validate_membership(model.memberships) is None


def test_rho_validation():
    with pytest.raises(ValueError):
        FgkConfig(c=2, rho=(1.0,))
    with pytest.raises(ValueError):
        FgkConfig(c=2, rho=(1.0, 0.0))
    with pytest.raises(ValueError):
        FgkConfig(c=2, cov_reg=1.0)
