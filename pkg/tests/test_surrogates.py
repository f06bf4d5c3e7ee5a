import dataclasses

import numpy as np
import pytest

from physadjust.control import EpisodeSpec, PendulumEnv, Transition
from physadjust.numerics import OptimizerConfig
from physadjust.physics import (
    PENDULUM_BOX,
    PENDULUM_STATE_BOX,
    forrester_crude,
    forrester_physics,
    forrester_true,
    make_perturbed_pendulum,
)
from physadjust.surrogates import (
    CKA,
    MODEL_KINDS,
    PHYSICS_KIND,
    RRA,
    Dataset,
    FitConfig,
    InvalidConfigError,
    ModelFormatError,
    NotFittedError,
    SamplingError,
    fit,
    fit_dynamics,
    load_model,
    make_model,
    predict_next_state,
    save_model,
    transitions_to_arrays,
)

FAST = FitConfig(optimizer=OptimizerConfig(steps=150, restarts=1, n_screen=32))
FP = forrester_physics().component(0)


def forrester_data(seed, n=8):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, n)
    return x[:, None], forrester_true(x)


def rmse_on_grid(kind, seed, n=8, config=FAST):
    X, y = forrester_data(seed, n)
    cfg = dataclasses.replace(config, ar1_low_box=(np.array([-0.6]), np.array([1.0])))
    grid = np.linspace(-0.6, 1.0, 40)
    pred = make_model(kind, FP, cfg).fit(X, y).predict(grid[:, None]).mean
    return float(np.sqrt(np.mean((pred - forrester_true(grid)) ** 2)))


def rra_config(**kw):
    base = dict(rra_lambda=0.5, rra_lengthscale=1.0, rra_features=32)
    base.update(kw)
    return dataclasses.replace(FitConfig(), **base)


def manual_features(omega, b, X):
    D = omega.shape[0]
    return np.sqrt(2.0 / D) * np.cos(-X @ omega.T + b)


# -- Dataset and registry --------------------------------------------------------


class TestDataset:
    def test_row_mismatch(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((3, 1)), np.zeros(2))

    def test_nonfinite(self):
        with pytest.raises(ValueError):
            Dataset(np.array([[np.nan]]), np.zeros(1))

    def test_vector_input_becomes_column(self):
        assert Dataset(np.arange(4.0), np.zeros(4)).X.shape == (4, 1)


class TestRegistry:
    def test_unknown_kind(self):
        with pytest.raises(InvalidConfigError):
            make_model("kriging", FP)

    @pytest.mark.parametrize("kind", ["zero-mean-gp", "phy-mean-gp", "gp-bias", "gp-scale", "ar1"])
    def test_gp_variants_need_data(self, kind):
        with pytest.raises(InvalidConfigError):
            fit(kind, Dataset(np.zeros((0, 1)), np.zeros(0)), forrester_physics(), FAST)

    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_unfitted_predict(self, kind):
        with pytest.raises(NotFittedError):
            make_model(kind, FP).predict(np.zeros((1, 1)))

    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_shapes_and_nonnegative_variance(self, kind):
        X, y = forrester_data(0)
        model = fit(kind, Dataset(X, y), forrester_physics(),
                    dataclasses.replace(FAST, ar1_low_box=(np.array([-0.6]), np.array([1.0]))))
        pd = model.predict(np.linspace(-1, 2, 17)[:, None])
        assert pd.mean.shape == pd.variance.shape == (17,)
        assert np.all(pd.variance >= 0) and np.all(np.isfinite(pd.mean))

    def test_ar1_needs_low_fidelity_points(self):
        X, y = forrester_data(0)
        with pytest.raises(InvalidConfigError):
            make_model("ar1", FP, dataclasses.replace(FAST, ar1_n_low=0)).fit(X, y)


# -- GP variants ------------------------------------------------------------------


class TestGaussianProcesses:
    def test_cka_prior_only(self):
        model = CKA(FP, FAST).fit(np.zeros((0, 1)), np.zeros(0))
        x = np.linspace(-0.5, 1.0, 9)[:, None]
        pd = model.predict(x)
        fp = forrester_crude(x[:, 0])
        assert np.array_equal(pd.mean, fp)
        # unit signal variances and noise std 0.1 at the initial hyperparameters
        assert np.allclose(pd.variance, fp**2 + 1.0 + 0.01, rtol=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_phy_mean_equals_gp_bias(self, seed):
        X, y = forrester_data(seed)
        grid = np.linspace(-0.6, 1.0, 40)[:, None]
        a = make_model("phy-mean-gp", FP, FAST).fit(X, y).predict(grid)
        b = make_model("gp-bias", FP, FAST).fit(X, y).predict(grid)
        assert np.max(np.abs(a.mean - b.mean)) <= 1e-10
        assert np.max(np.abs(a.variance - b.variance)) <= 1e-10

    def test_interpolates_with_small_noise(self):
        X, y = forrester_data(3)
        cfg = dataclasses.replace(FAST, optimize=False, init_log_noise_std=float(np.log(1e-4)),
                                  init_log_lengthscale=float(np.log(0.3)))
        pd = CKA(FP, cfg).fit(X, y).predict(X)
        assert np.max(np.abs(pd.mean - y)) < 1e-3

    def test_reverts_to_physics_far_away(self):
        X, y = forrester_data(4)
        model = CKA(FP, FAST).fit(X, y)
        far = X.max() + 25 * model.max_lengthscale() + np.array([[0.0], [1.0], [7.0]])
        pd = model.predict(far)
        assert np.max(np.abs(pd.mean - forrester_crude(far[:, 0]))) <= 1e-6
        assert np.max(np.abs(pd.variance - model.prior_variance(far))) <= 1e-6

    @pytest.mark.parametrize("kind", ["cka", "gp-bias", "gp-scale", "zero-mean-gp"])
    def test_variance_at_training_points_includes_noise(self, kind):
        X, y = forrester_data(5)
        model = make_model(kind, FP, FAST).fit(X, y)
        noise = model.noise_variance(model.theta) * model.r_scale**2
        assert np.all(model.predict(X).variance >= noise * (1 - 1e-9))

    def test_fit_lowers_nlml(self):
        X, y = forrester_data(6)
        model = CKA(FP, FAST).fit(X, y)
        res = model.optimize_result
        assert res.value < res.initial_value
        # best-so-far only rises where a new restart begins
        assert np.sum(np.diff(res.trace) > 0) <= FAST.optimizer.restarts

    def test_cka_factor_size_matches_data(self):
        X, y = forrester_data(7)
        for n_low in (5, 80):
            model = CKA(FP, dataclasses.replace(FAST, ar1_n_low=n_low)).fit(X, y)
            assert model.factor.size == len(y)

    def test_ar1_composition(self):
        X, y = forrester_data(8)
        cfg = dataclasses.replace(FAST, ar1_low_box=(np.array([-0.6]), np.array([1.0])))
        model = make_model("ar1", FP, cfg).fit(X, y)
        q = np.linspace(-0.6, 1.0, 11)[:, None]
        pd = model.predict(q)
        low = model.low.predict(q, include_noise=False)
        assert model.low.X_train.shape[0] == 40
        # ρ²·var₁ is the only part of the variance that depends on the low-fidelity fit
        assert np.all(pd.variance >= model.rho**2 * low.variance - 1e-12)

    def test_deterministic_fit(self):
        X, y = forrester_data(9)
        a = CKA(FP, FAST).fit(X, y)
        b = CKA(FP, FAST).fit(X, y)
        assert a.theta.tobytes() == b.theta.tobytes()


# -- RRA -----------------------------------------------------------------------------


class TestRRA:
    @pytest.mark.parametrize("seed", range(5))
    def test_normal_equation_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n, d = int(rng.integers(1, 51)), int(rng.integers(1, 4))
        X = rng.normal(size=(n, d))
        y = rng.normal(size=n)
        fpv = rng.normal(size=n)
        cfg = rra_config(seed=seed, rra_features=int(rng.integers(1, 33)), rra_lambda=float(rng.uniform(0.1, 3)))
        model = RRA(None, cfg).fit(X, y, fp_values=fpv)
        Xs = (X - X.mean(0)) / np.where(X.std(0) > 1e-8, X.std(0), 1.0) if n > 1 else X - X.mean(0)
        Phi = np.hstack([manual_features(model.map_rho.omega, model.map_rho.b, Xs) * fpv[:, None],
                         manual_features(model.map_delta.omega, model.map_delta.b, Xs)])
        beta = np.linalg.solve(Phi.T @ Phi + cfg.rra_lambda * np.eye(Phi.shape[1]), Phi.T @ (y - fpv))
        assert np.max(np.abs(model.beta_mean - beta)) <= 1e-8

    def test_prior_only_reverts_to_physics(self):
        model = RRA(FP, FitConfig()).fit(np.zeros((0, 1)), np.zeros(0))
        x = np.linspace(0, 1, 5)[:, None]
        pd = model.predict(x)
        assert np.array_equal(pd.mean, forrester_crude(x[:, 0]))
        assert np.all(pd.variance > 0)

    def test_auto_selection_records_choice(self):
        X, y = forrester_data(1)
        model = RRA(FP, FitConfig()).fit(X, y)
        assert model.lam in FitConfig().rra_lambda_grid
        assert np.isfinite(model.log_evidence)

    def test_bad_string_config(self):
        with pytest.raises(InvalidConfigError):
            RRA(FP, rra_config(rra_lambda="best")).fit(*forrester_data(0))

    def test_covariance_symmetric_psd(self):
        model = RRA(FP, rra_config()).fit(*forrester_data(2))
        assert np.allclose(model.beta_cov, model.beta_cov.T)
        assert np.linalg.eigvalsh(model.beta_cov).min() > -1e-12

    def test_sampled_functions_average_to_mean(self):
        model = RRA(FP, rra_config()).fit(*forrester_data(3))
        x = np.linspace(-0.5, 1.0, 7)[:, None]
        draws = np.array([model.sample_function(s)(x) for s in range(1000)])
        pd = model.predict(x, include_noise=False)
        se = np.sqrt(pd.variance / 1000)
        assert np.all(np.abs(draws.mean(0) - pd.mean) <= 3 * se + 1e-12)

    def test_sample_deterministic(self):
        model = RRA(FP, rra_config()).fit(*forrester_data(4))
        x = np.linspace(0, 1, 4)[:, None]
        assert np.array_equal(model.sample_function(9)(x), model.sample_function(9)(x))

    def test_degenerate_covariance_gives_mean(self):
        model = RRA(FP, rra_config()).fit(*forrester_data(5))
        model.beta_cov = np.zeros_like(model.beta_cov)
        x = np.linspace(0, 1, 4)[:, None]
        assert np.array_equal(model.sample_function(0)(x), model.predict(x).mean)

    def test_non_psd_covariance_rejected(self):
        model = RRA(FP, rra_config()).fit(*forrester_data(5))
        model.beta_cov = -np.eye(model.beta_cov.shape[0])
        with pytest.raises(SamplingError):
            model.sample_function(0)


@pytest.mark.slow
def test_cka_beats_physics_mean_gp_in_most_seeds():
    wins = sum(rmse_on_grid("cka", s, config=FitConfig()) < rmse_on_grid("phy-mean-gp", s, config=FitConfig())
               for s in range(100))
    assert wins >= 70


@pytest.mark.slow
@pytest.mark.parametrize("kind", ["cka", "rra"])
def test_more_data_helps(kind):
    r4 = [rmse_on_grid(kind, s, n=4, config=FitConfig()) for s in range(50)]
    r8 = [rmse_on_grid(kind, s, n=8, config=FitConfig()) for s in range(50)]
    assert np.median(r8) < np.median(r4)


# -- dynamics ----------------------------------------------------------------------


def pendulum_transitions(n_trials, seed):
    env = PendulumEnv()
    spec = EpisodeSpec()
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_trials):
        s = spec.sample_initial_state(rng)
        for _ in range(spec.horizon):
            a = rng.uniform(-10, 10)
            s1 = env.step(s, a)
            out.append(Transition(s, np.array([a]), env.cost(s1), s1))
            s = s1
    return out


class TestDynamics:
    def test_arrays(self):
        data = pendulum_transitions(1, 0)
        X, Y = transitions_to_arrays(data)
        assert X.shape == (25, 5) and Y.shape == (25, 4)

    def test_inconsistent_dimensions(self):
        good = Transition(np.zeros(4), np.zeros(1), 0.0, np.zeros(4))
        bad = Transition(np.zeros(3), np.zeros(1), 0.0, np.zeros(3))
        with pytest.raises(InvalidConfigError):
            transitions_to_arrays([good, bad])

    def test_prior_only_cka_keeps_equilibrium(self):
        model = fit_dynamics([], make_perturbed_pendulum(0), "cka", FAST)
        pd = predict_next_state(model, [[0.0, np.pi, 0.0, 0.0]], [0.0])
        assert np.allclose(pd.mean[0], [0.0, np.pi, 0.0, 0.0], atol=1e-12)

    def test_prior_only_rollout_tracks_physics(self):
        physics = make_perturbed_pendulum(1)
        model = fit_dynamics([], physics, "cka", FAST)
        s_model = s_phys = np.array([0.1, 3.0, 0.0, 0.0])
        for a in np.linspace(-5, 5, 10):
            s_model = predict_next_state(model, s_model[None], [a]).mean[0]
            s_phys = physics.next_state(s_phys, a)
        assert np.allclose(s_model, s_phys, atol=1e-10)

    def test_physics_kind_has_zero_variance(self):
        model = fit_dynamics(pendulum_transitions(1, 0), make_perturbed_pendulum(0), PHYSICS_KIND)
        pd = model.predict(np.array([[0.0, np.pi, 0.0, 0.0, 1.0]]))
        assert np.all(pd.variance == 0)

    def test_variance_contracts_at_new_observation(self):
        physics = make_perturbed_pendulum(2)
        data = pendulum_transitions(1, 2)
        cfg = dataclasses.replace(FAST, optimize=False)
        before = fit_dynamics(data[:-1], physics, "cka", cfg)
        after = fit_dynamics(data, physics, "cka", cfg)
        x = np.concatenate([data[-1].state, data[-1].action])[None]
        assert np.all(after.predict(x).variance < before.predict(x).variance)

    def test_nonfinite_query_rejected(self):
        model = fit_dynamics([], make_perturbed_pendulum(0), "cka", FAST)
        with pytest.raises(InvalidConfigError):
            model.predict(np.array([[np.nan, 0, 0, 0, 0]]))

    def test_fuzz_in_box(self):
        physics = make_perturbed_pendulum(3)
        model = fit_dynamics(pendulum_transitions(2, 3), physics, "cka", FAST, box=PENDULUM_STATE_BOX)
        X = PENDULUM_BOX.sample(np.random.default_rng(0), 10_000)
        mean = model.predict(X).mean
        assert np.all(np.isfinite(mean))
        assert np.all(PENDULUM_STATE_BOX.contains(mean))

    def test_data_beats_physics(self):
        physics = make_perturbed_pendulum(4)
        train, test = pendulum_transitions(5, 4), pendulum_transitions(1, 99)
        model = fit_dynamics(train, physics, "cka", FAST)
        X, Y = transitions_to_arrays(test)
        err_model = np.sqrt(np.mean((model.predict(X).mean - Y) ** 2, axis=0))
        err_phys = np.sqrt(np.mean((physics(X) - Y) ** 2, axis=0))
        assert np.all(err_model[1:] < err_phys[1:])


# -- persistence ----------------------------------------------------------------------


class TestPersistence:
    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_round_trip(self, kind, tmp_path):
        X, y = forrester_data(11)
        cfg = dataclasses.replace(FAST, ar1_low_box=(np.array([-0.6]), np.array([1.0])))
        model = make_model(kind, FP, cfg).fit(X, y)
        path = save_model(model, tmp_path / f"{kind}.npz", physics=forrester_physics())
        loaded = load_model(path)
        q = np.linspace(-0.6, 1.0, 25)[:, None]
        a, b = model.predict(q), loaded.predict(q)
        assert np.max(np.abs(a.mean - b.mean)) <= 1e-12
        assert np.max(np.abs(a.variance - b.variance)) <= 1e-12

    def test_dynamics_round_trip(self, tmp_path):
        physics = make_perturbed_pendulum(5)
        model = fit_dynamics(pendulum_transitions(1, 5), physics, "cka", FAST, box=PENDULUM_STATE_BOX)
        loaded = load_model(save_model(model, tmp_path / "dyn.npz"))
        X = PENDULUM_BOX.sample(np.random.default_rng(1), 50)
        a, b = model.predict(X), loaded.predict(X)
        assert loaded.physics.params == physics.params
        assert np.max(np.abs(a.mean - b.mean)) <= 1e-12
        assert np.max(np.abs(a.variance - b.variance)) <= 1e-12

    def test_version_checked(self, tmp_path):
        path = tmp_path / "bad.npz"
        np.savez(path, x=np.zeros(1))
        with pytest.raises(ModelFormatError):
            load_model(path)
