"""Recursive AR1 co-kriging baseline: f_2(x) = ρ f_1(x) + δ(x), constant ρ."""

from __future__ import annotations

import numpy as np

from ..numerics import (
    KernelParams,
    NumericalFailure,
    cholesky,
    nlml_and_gradient,
    optimize_hyperparams,
    rbf_kernel,
    rbf_kernel_and_grads,
)
from ..numerics.optim import OptimizationFailure
from .base import (
    FitConfig,
    FitError,
    InvalidConfigError,
    PredictiveDistribution,
    Standardizer,
    SurrogateModel,
    as_2d,
    rms_scale,
)
from .gp import GaussianProcess, ZeroMeanGP


def low_fidelity_design(n: int, lower, upper, seed=0) -> np.ndarray:
    """Evenly spaced points in 1-D, seeded uniform draws otherwise."""
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if lower.size == 1:
        return np.linspace(lower[0], upper[0], n).reshape(-1, 1)
    rng = np.random.default_rng(seed)
    return rng.uniform(lower, upper, size=(n, lower.size))


class AR1CoKriging(SurrogateModel):
    """Two-stage co-kriging.

    Stage one fits a zero-mean GP to ``ar1_n_low`` samples of f_p spread over
    the input box. Stage two fits δ's kernel, the noise and the constant ρ
    jointly by NLML of y - ρ μ₁(x) at the observed inputs. Unlike CKA the
    physics model is only seen through the stage-one GP.
    """

    kind = "ar1"

    def __init__(self, fp=None, config: FitConfig | None = None):
        super().__init__(fp, config)
        self.low = None

    def _low_box(self, X):
        if self.config.ar1_low_box is not None:
            return self.config.ar1_low_box
        if X.shape[0] == 0:
            raise InvalidConfigError("ar1 needs an input box when there is no data")
        return X.min(axis=0), X.max(axis=0)

    def fit(self, X, y, fp_values=None):
        X = as_2d(X)
        y = np.asarray(y, dtype=float).ravel()
        n_low = self.config.ar1_n_low
        if n_low < 1:
            raise InvalidConfigError("ar1 needs at least one generated low-fidelity point")
        lo, hi = self._low_box(X)
        X_low = low_fidelity_design(n_low, lo, hi, seed=self.config.seed)
        self.low = ZeroMeanGP(self.fp, self.config).fit(X_low, self._fp(X_low))

        N, d = X.shape
        self.X_train, self.y_train = X.copy(), y.copy()
        self.mu_low_train = self.low.predict(X, include_noise=False).mean
        self.stdz = Standardizer.from_data(X) if N else Standardizer.identity(d)
        self.y_scale = rms_scale(y)

        b = self.config.bounds
        cfg = self.config
        theta0 = np.concatenate([
            np.full(d, cfg.init_log_lengthscale),
            [cfg.init_log_signal_variance, cfg.init_log_noise_std, 1.0],
        ])
        lower = np.concatenate([np.full(d, b.log_lengthscale[0]),
                                [b.log_signal_variance[0], b.log_noise_std[0], b.rho[0]]])
        upper = np.concatenate([np.full(d, b.log_lengthscale[1]),
                                [b.log_signal_variance[1], b.log_noise_std[1], b.rho[1]]])
        self.theta = theta0
        if cfg.optimize and N > 0:
            Xs, ys, ms = self._standardized_train()
            try:
                res = optimize_hyperparams(
                    self._objective(Xs, ys, ms), theta0, cfg.optimizer, lower=lower, upper=upper
                )
            except OptimizationFailure as exc:
                raise FitError(f"ar1: {exc}") from exc
            self.theta = res.params
        self._condition()
        self.fitted = True
        return self

    @property
    def rho(self) -> float:
        return float(self.theta[-1])

    @property
    def delta_params(self) -> KernelParams:
        return KernelParams.from_vector(self.theta[:-2])

    def _standardized_train(self):
        return (
            self.stdz.transform(self.X_train),
            self.y_train / self.y_scale,
            self.mu_low_train / self.y_scale,
        )

    @staticmethod
    def _objective(Xs, ys, ms):
        N = Xs.shape[0]

        def objective(theta):
            kp = KernelParams.from_vector(theta[:-2])
            noise = float(np.exp(2.0 * theta[-2]))
            rho = theta[-1]
            K, dK = rbf_kernel_and_grads(Xs, kp)
            K[np.diag_indices(N)] += noise
            r = ys - rho * ms
            factor = cholesky(K)
            value, grad = nlml_and_gradient(r, K, dK + [2.0 * noise * np.eye(N)], factor)
            drho = -float(factor.solve(r) @ ms)
            return value, np.concatenate([grad, [drho]])

        return objective

    def _condition(self):
        Xs, ys, ms = self._standardized_train()
        K = rbf_kernel(Xs, Xs, self.delta_params)
        K[np.diag_indices(K.shape[0])] += np.exp(2.0 * self.theta[-2])
        try:
            self.factor = cholesky(K)
        except NumericalFailure as exc:
            raise FitError(f"ar1: {exc}") from exc
        self.alpha = self.factor.solve(ys - self.rho * ms)

    def predict(self, X, fp_values=None, include_noise: bool = True) -> PredictiveDistribution:
        self._check_fitted()
        X = as_2d(X)
        low = self.low.predict(X, include_noise=False)
        kp = self.delta_params
        var_d = np.full(X.shape[0], kp.signal_variance)
        mean_d = np.zeros(X.shape[0])
        if self.X_train.shape[0]:
            Xs = self.stdz.transform(self.X_train)
            q = rbf_kernel(Xs, self.stdz.transform(X), kp)
            mean_d = q.T @ self.alpha
            v = self.factor.solve_lower(q)
            var_d = var_d - np.sum(v * v, axis=0)
        if include_noise:
            var_d = var_d + np.exp(2.0 * self.theta[-2])
        var_d = np.maximum(var_d, 0.0) * self.y_scale**2
        mean = self.rho * low.mean + self.y_scale * mean_d
        return PredictiveDistribution(mean, self.rho**2 * low.variance + var_d)

    def to_state(self) -> dict:
        self._check_fitted()
        low = {f"low.{k}": v for k, v in self.low.to_state().items()}
        return {
            "kind": self.kind,
            "theta": self.theta,
            "X": self.X_train,
            "y": self.y_train,
            "x_mean": self.stdz.mean,
            "x_std": self.stdz.std,
            "y_scale": self.y_scale,
            **low,
        }

    @classmethod
    def from_state(cls, state, fp=None):
        model = cls(fp=fp)
        low_state = {k[4:]: v for k, v in state.items() if k.startswith("low.")}
        model.low = GaussianProcess.from_state(low_state, fp)
        model.theta = np.asarray(state["theta"], dtype=float)
        model.X_train = np.asarray(state["X"], dtype=float)
        model.y_train = np.asarray(state["y"], dtype=float)
        model.stdz = Standardizer(np.asarray(state["x_mean"]), np.asarray(state["x_std"]))
        model.y_scale = float(state["y_scale"])
        model.mu_low_train = model.low.predict(model.X_train, include_noise=False).mean
        model._condition()
        model.fitted = True
        return model
