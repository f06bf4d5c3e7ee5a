import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from physadjust.numerics import (
    KernelParams,
    NumericalFailure,
    OptimizationFailure,
    OptimizerConfig,
    cholesky,
    cholesky_solve,
    make_rff_map,
    nlml,
    nlml_and_gradient,
    optimize_hyperparams,
    rbf_kernel,
    rbf_kernel_and_grads,
    rff_features,
)
from physadjust.numerics.linalg import INITIAL_JITTER


def gauss_jordan_inverse(A):
    """Plain-Python elimination with partial pivoting, used as an oracle."""
    n = len(A)
    M = [list(map(float, row)) + [1.0 if i == j else 0.0 for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return np.array([row[n:] for row in M])


def gp_objective(X, y):
    """NLML of a zero-mean RBF GP as a function of [log l..., log s², log σ]."""

    def f(theta):
        kp = KernelParams.from_vector(theta[:-1])
        K, dK = rbf_kernel_and_grads(X, kp)
        noise = np.exp(2.0 * theta[-1])
        K = K + noise * np.eye(len(y))
        dK = list(dK) + [2.0 * noise * np.eye(len(y))]
        return nlml_and_gradient(y, K, dK)

    return f


def central_diff(f, theta, h=1e-5):
    g = np.zeros_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (f(theta + e)[0] - f(theta - e)[0]) / (2 * h)
    return g


# -- kernels -------------------------------------------------------------------


class TestRbfKernel:
    def test_diagonal_equals_signal_variance(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(6, 3))
        kp = KernelParams(np.log([0.5, 1.0, 2.0]), np.log(2.5))
        assert np.allclose(np.diag(rbf_kernel(X, X, kp)), 2.5)

    def test_unit_distance_value(self):
        # exp(-0.5) from math.exp
        k = rbf_kernel(np.array([[0.0]]), np.array([[1.0]]), KernelParams.default(1))
        assert k[0, 0] == pytest.approx(0.6065306597126334, abs=1e-14)

    def test_far_points_vanish(self):
        k = rbf_kernel(np.array([[0.0]]), np.array([[12.0], [-40.0]]), KernelParams.default(1))
        assert np.all(k < 1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            rbf_kernel(np.zeros((2, 2)), np.zeros((2, 3)), KernelParams.default(2))

    def test_grads_match_finite_differences(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(5, 2))
        theta = np.array([0.2, -0.3, 0.4])
        _, grads = rbf_kernel_and_grads(X, KernelParams.from_vector(theta))
        for i in range(theta.size):
            e = np.zeros(3)
            e[i] = 1e-6
            fd = (rbf_kernel(X, X, KernelParams.from_vector(theta + e))
                  - rbf_kernel(X, X, KernelParams.from_vector(theta - e))) / 2e-6
            assert np.allclose(grads[i], fd, atol=1e-8)

    @settings(max_examples=30, deadline=None)
    @given(
        X=arrays(np.float64, (12, 2), elements=st.floats(-5, 5)),
        log_ls=st.floats(-2, 2),
        log_s2=st.floats(-3, 3),
    )
    def test_symmetric_psd(self, X, log_ls, log_s2):
        kp = KernelParams(np.full(2, log_ls), log_s2)
        K = rbf_kernel(X, X, kp)
        assert np.allclose(K, K.T)
        assert np.linalg.eigvalsh(K).min() >= -1e-8 * kp.signal_variance
        cholesky(K)


# -- linalg --------------------------------------------------------------------


class TestCholesky:
    def test_identity_uses_initial_jitter(self):
        b = np.array([1.0, -2.0, 3.0])
        X, factor = cholesky_solve(np.eye(3), b)
        assert factor.jitter_used == INITIAL_JITTER
        assert np.allclose(X, b)

    def test_diagonal(self):
        X, _ = cholesky_solve(np.diag([2.0, 2.0]), np.ones(2))
        assert np.allclose(X, 0.5)

    def test_against_elimination_oracle(self):
        rng = np.random.default_rng(2)
        M = rng.normal(size=(5, 5))
        A = M.T @ M + np.eye(5)
        B = rng.normal(size=(5, 2))
        X, factor = cholesky_solve(A, B)
        expected = gauss_jordan_inverse(A + factor.jitter_used * np.eye(5)) @ B
        assert np.allclose(X, expected, rtol=1e-8, atol=1e-10)

    @pytest.mark.parametrize("n", [1, 10, 50, 200])
    def test_residual_and_reconstruction(self, n):
        rng = np.random.default_rng(n)
        M = rng.normal(size=(n, n))
        A = M @ M.T + n * np.eye(n)
        B = rng.normal(size=(n, 3))
        X, f = cholesky_solve(A, B)
        Aj = A + f.jitter_used * np.eye(n)
        assert np.linalg.norm(Aj @ X - B) / np.linalg.norm(B) < 1e-8
        L = f.lower_triangular
        assert np.linalg.norm(L @ L.T - Aj) / np.linalg.norm(Aj) < 1e-8
        assert np.all(np.diag(L) > 0)

    def test_jitter_escalates_by_decades(self):
        A = np.diag([1.0, -1e-6])
        f = cholesky(A)
        mean_diag = 0.5 * (1.0 - 1e-6)
        assert f.jitter_used == pytest.approx(1e-5 * mean_diag)

    def test_indefinite_raises_with_jitter(self):
        with pytest.raises(NumericalFailure) as info:
            cholesky(np.diag([1.0, -1.0]))
        assert info.value.jitter > 0


# -- likelihood ----------------------------------------------------------------


class TestNlml:
    @pytest.mark.parametrize(
        "r, K, expected",
        [
            ([0.0], [[1.0]], 0.9189385332046727),
            ([1.0], [[1.0]], 1.4189385332046727),
            ([0.0, 0.0], np.eye(2), 1.8378770664093453),
        ],
    )
    def test_closed_form(self, r, K, expected):
        assert nlml(np.array(r), np.array(K)) == pytest.approx(expected, abs=1e-7)

    @pytest.mark.parametrize("n", [3, 10, 30])
    @pytest.mark.parametrize("seed", range(3))
    def test_gradient_matches_finite_differences(self, n, seed):
        rng = np.random.default_rng(seed * 100 + n)
        X = rng.uniform(-2, 2, size=(n, 2))
        y = np.sin(X[:, 0]) + 0.1 * rng.normal(size=n)
        theta = np.array([*rng.normal(0, 0.3, 2), rng.normal(0, 0.3), np.log(0.3)])
        f = gp_objective(X, y)
        _, g = f(theta)
        fd = central_diff(f, theta)
        assert np.allclose(g, fd, rtol=1e-4, atol=1e-6)

    def test_unused_parameter_has_zero_gradient(self):
        K = np.eye(3)
        _, g = nlml_and_gradient(np.ones(3), K, [np.zeros((3, 3))])
        assert g[0] == 0.0

    def test_log_noise_gradient_is_n(self):
        # K = σ²I, dK/dlog σ = 2σ²I, r = 0
        n, s2 = 7, 0.3
        _, g = nlml_and_gradient(np.zeros(n), s2 * np.eye(n), [2 * s2 * np.eye(n)])
        assert g[0] == pytest.approx(n, rel=1e-6)


# -- optimizer -----------------------------------------------------------------


class TestOptimizer:
    def test_convex_quadratic(self):
        res = optimize_hyperparams(lambda p: ((p[0] - 3) ** 2, 2 * (p - 3)), [0.0],
                                   OptimizerConfig(steps=2000, learning_rate=0.05, restarts=0))
        assert res.params[0] == pytest.approx(3.0, abs=1e-3)

    def test_never_worse_than_initial(self):
        rng = np.random.default_rng(4)
        X = rng.uniform(0, 1, (8, 1))
        f = gp_objective(X, np.sin(6 * X[:, 0]))
        x0 = np.array([0.0, 0.0, np.log(0.1)])
        res = optimize_hyperparams(f, x0, OptimizerConfig(steps=100, restarts=2),
                                   lower=np.full(3, -5.0), upper=np.full(3, 5.0))
        assert res.value < f(x0)[0]
        assert res.value <= res.initial_value
        assert np.all(np.diff(res.trace[:100]) <= 0)

    @pytest.mark.parametrize("mode", ["screen", "perturb"])
    def test_deterministic(self, mode):
        rng = np.random.default_rng(5)
        X = rng.uniform(0, 1, (8, 1))
        f = gp_objective(X, np.cos(4 * X[:, 0]))
        cfg = OptimizerConfig(steps=30, restarts=5, restart_mode=mode, seed=11)
        bounds = dict(lower=np.full(3, -5.0), upper=np.full(3, 5.0))
        a = optimize_hyperparams(f, np.zeros(3), cfg, **bounds)
        b = optimize_hyperparams(f, np.zeros(3), cfg, **bounds)
        assert a.params.tobytes() == b.params.tobytes()
        assert a.value == b.value

    def test_all_starts_nonfinite(self):
        with pytest.raises(OptimizationFailure):
            optimize_hyperparams(lambda p: (np.nan, np.zeros(1)), [0.0], OptimizerConfig(restarts=2, steps=3))


# -- random Fourier features ---------------------------------------------------


class TestRff:
    def test_deterministic(self):
        a, b = make_rff_map(3, 20, 0.7, 42), make_rff_map(3, 20, 0.7, 42)
        assert np.array_equal(a.omega, b.omega) and np.array_equal(a.b, b.b)

    def test_phases_and_bounds(self):
        m = make_rff_map(2, 500, 1.3, 0)
        assert np.all((m.b >= 0) & (m.b < 2 * np.pi))
        Phi = rff_features(m, np.random.default_rng(0).normal(size=(50, 2)) * 10)
        assert Phi.shape == (50, 500)
        assert np.all(np.abs(Phi) <= np.sqrt(2 / 500) + 1e-15)
        assert np.all(np.sum(Phi * Phi, axis=1) <= 2 + 1e-12)

    def test_zero_frequency_feature(self):
        from physadjust.numerics import RFFMap

        m = RFFMap(np.zeros((1, 1)), np.zeros(1), 1.0)
        assert rff_features(m, [[0.7]])[0, 0] == pytest.approx(np.sqrt(2))

    def test_zero_input(self):
        m = make_rff_map(3, 16, 1.0, 3)
        assert np.allclose(rff_features(m, np.zeros((1, 3)))[0], np.sqrt(2 / 16) * np.cos(m.b))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            rff_features(make_rff_map(2, 5, 1.0, 0), np.zeros((3, 3)))

    @pytest.mark.parametrize("kwargs", [dict(D=0, lengthscale=1.0), dict(D=3, lengthscale=0.0)])
    def test_preconditions(self, kwargs):
        with pytest.raises(ValueError):
            make_rff_map(1, rng_seed=0, **kwargs)

    def test_kernel_approximation(self):
        rng = np.random.default_rng(7)
        x, y = rng.uniform(-3, 3, (2, 100, 1))
        m = make_rff_map(1, 2000, 1.0, 7)
        approx = np.sum(rff_features(m, x) * rff_features(m, y), axis=1)
        exact = np.exp(-0.5 * (x[:, 0] - y[:, 0]) ** 2)
        # single seed; the acceptance suite checks the median over seeds
        assert np.max(np.abs(approx - exact)) < 0.1

    def test_lengthscale_scales_frequencies(self):
        s1 = make_rff_map(1, 20000, 1.0, 0).omega.std()
        s2 = make_rff_map(1, 20000, 2.0, 1).omega.std()
        assert s2 / s1 == pytest.approx(0.5, rel=0.1)

    def test_error_decreases_with_features(self):
        rng = np.random.default_rng(8)
        x, y = rng.uniform(-3, 3, (2, 100, 1))
        exact = np.exp(-0.5 * (x[:, 0] - y[:, 0]) ** 2)
        medians = []
        for D in (50, 200, 800, 2000):
            errs = []
            for seed in range(20):
                m = make_rff_map(1, D, 1.0, seed)
                errs.append(np.max(np.abs(np.sum(rff_features(m, x) * rff_features(m, y), axis=1) - exact)))
            medians.append(np.median(errs))
        assert all(a > b for a, b in zip(medians, medians[1:]))


def test_zero_initial_jitter_tries_exact_first():
    f = cholesky(np.eye(3), initial_jitter=0.0)
    assert f.jitter_used == 0.0
    f = cholesky(np.diag([1.0, -1e-6]), initial_jitter=0.0)
    assert f.jitter_used > 0.0
