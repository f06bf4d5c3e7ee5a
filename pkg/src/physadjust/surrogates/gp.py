"""Exact GP surrogates that differ only in prior mean and covariance assembly.

All models work on standardized inputs and on the residual y - m(x) divided
by its root-mean-square, where m is the prior mean (0 or f_p). The residual
is scaled but never centred, so far from data every model reverts exactly to
its prior mean. Where f_p multiplies a kernel it is likewise divided by its
RMS over the training inputs; the signal variance of that channel is then the
variance of ρ(x) - 1 measured in residual-per-physics units.
"""

from __future__ import annotations

import numpy as np

from ..numerics import (
    KernelParams,
    NumericalFailure,
    cholesky,
    nlml,
    nlml_and_gradient,
    optimize_hyperparams,
    rbf_kernel,
    rbf_kernel_and_grads,
)
from ..numerics.optim import OptimizationFailure
from .base import (
    FitConfig,
    FitError,
    PredictiveDistribution,
    Standardizer,
    SurrogateModel,
    as_2d,
    rms_scale,
)


class _KernelGP(SurrogateModel):
    """Template for the GP variants; subclasses declare their channels.

    ``channels`` lists, in parameter order, one boolean per kernel saying
    whether that kernel is sandwiched between diag(f_p) factors.
    """

    channels: tuple = ()
    physics_mean: bool = True

    def __init__(self, fp=None, config: FitConfig | None = None, init_theta=None):
        super().__init__(fp, config)
        self.init_theta = None if init_theta is None else np.asarray(init_theta, dtype=float)
        self.theta = None
        self.nlml_value = np.nan

    # -- parameter layout -------------------------------------------------

    @property
    def uses_fp(self) -> bool:
        return self.physics_mean or any(self.channels)

    def n_params(self, d: int) -> int:
        return len(self.channels) * (d + 1) + 1

    def initial_theta(self, d: int) -> np.ndarray:
        cfg = self.config
        block = np.concatenate([np.full(d, cfg.init_log_lengthscale), [cfg.init_log_signal_variance]])
        return np.concatenate([np.tile(block, len(self.channels)), [cfg.init_log_noise_std]])

    def theta_bounds(self, d: int):
        b = self.config.bounds
        lo = np.concatenate([np.full(d, b.log_lengthscale[0]), [b.log_signal_variance[0]]])
        hi = np.concatenate([np.full(d, b.log_lengthscale[1]), [b.log_signal_variance[1]]])
        n = len(self.channels)
        return (
            np.concatenate([np.tile(lo, n), [b.log_noise_std[0]]]),
            np.concatenate([np.tile(hi, n), [b.log_noise_std[1]]]),
        )

    def kernel_params(self, theta=None) -> list:
        theta = self.theta if theta is None else theta
        d = (len(theta) - 1) // len(self.channels) - 1
        return [
            KernelParams.from_vector(theta[i * (d + 1):(i + 1) * (d + 1)])
            for i in range(len(self.channels))
        ]

    @staticmethod
    def noise_variance(theta) -> float:
        return float(np.exp(2.0 * theta[-1]))

    # -- covariance assembly ----------------------------------------------

    def _train_cov(self, theta, Xs, ft):
        """Noisy training covariance and its derivatives, in theta order."""
        N = Xs.shape[0]
        K = np.zeros((N, N))
        dK = []
        outer = np.outer(ft, ft) if any(self.channels) else None
        for scaled, kp in zip(self.channels, self.kernel_params(theta)):
            Kc, grads = rbf_kernel_and_grads(Xs, kp)
            if scaled:
                Kc = outer * Kc
                grads = [outer * g for g in grads]
            K += Kc
            dK.extend(grads)
        noise = self.noise_variance(theta)
        K[np.diag_indices(N)] += noise
        dK.append(2.0 * noise * np.eye(N))
        return K, dK

    def _cross_cov(self, theta, Xs, ft, Xq, fq):
        q = np.zeros((Xs.shape[0], Xq.shape[0]))
        for scaled, kp in zip(self.channels, self.kernel_params(theta)):
            Kc = rbf_kernel(Xs, Xq, kp)
            if scaled:
                Kc = ft[:, None] * Kc * fq[None, :]
            q += Kc
        return q

    def _prior_var(self, theta, fq):
        """Latent (noise-free) prior variance at the queries, standardized units."""
        var = np.zeros_like(fq)
        for scaled, kp in zip(self.channels, self.kernel_params(theta)):
            var = var + (kp.signal_variance * fq * fq if scaled else kp.signal_variance)
        return var

    # -- fitting ------------------------------------------------------------

    def _objective(self, Xs, rs, ft):
        def objective(theta):
            K, dK = self._train_cov(theta, Xs, ft)
            return nlml_and_gradient(rs, K, dK)

        return objective

    def fit(self, X, y, fp_values=None):
        X = as_2d(X)
        y = np.asarray(y, dtype=float).ravel()
        N, d = X.shape
        if N != y.size:
            raise ValueError(f"X has {N} rows but y has {y.size} entries")
        fpv = self._fp(X, fp_values) if self.uses_fp else np.zeros(N)
        self.X_train, self.y_train, self.fp_train = X.copy(), y.copy(), fpv.copy()
        mean = fpv if self.physics_mean else np.zeros(N)
        if N == 0:
            self.stdz = Standardizer.identity(d)
            self.r_scale = self.f_scale = 1.0
        else:
            self.stdz = Standardizer.from_data(X)
            self.r_scale = rms_scale(y - mean)
            self.f_scale = rms_scale(fpv) if any(self.channels) else 1.0

        theta0 = self.initial_theta(d) if self.init_theta is None else self.init_theta.copy()
        if theta0.size != self.n_params(d):
            raise ValueError(f"expected {self.n_params(d)} hyperparameters, got {theta0.size}")
        self.theta = theta0
        Xs, rs, ft = self._standardized_train()

        if self.config.optimize and N > 0:
            idx = np.arange(N)
            m = self.config.max_opt_points
            if m is not None and N > m:
                rng = np.random.default_rng(self.config.seed)
                idx = np.sort(rng.choice(N, size=m, replace=False))
            lo, hi = self.theta_bounds(d)
            try:
                res = optimize_hyperparams(
                    self._objective(Xs[idx], rs[idx], ft[idx]), theta0,
                    self.config.optimizer, lower=lo, upper=hi,
                )
            except OptimizationFailure as exc:
                raise FitError(f"{self.kind}: {exc}") from exc
            self.theta = res.params
            self.optimize_result = res
        self._condition()
        self.fitted = True
        return self

    def _standardized_train(self):
        Xs = self.stdz.transform(self.X_train)
        mean = self.fp_train if self.physics_mean else 0.0
        rs = (self.y_train - mean) / self.r_scale
        ft = self.fp_train / self.f_scale
        return Xs, rs, ft

    def _condition(self):
        Xs, rs, ft = self._standardized_train()
        K, _ = self._train_cov(self.theta, Xs, ft)
        try:
            self.factor = cholesky(K)
        except NumericalFailure as exc:
            raise FitError(f"{self.kind}: {exc}") from exc
        self.alpha = self.factor.solve(rs)
        if rs.size:
            self.nlml_value = nlml(rs, K, self.factor)

    # -- prediction -----------------------------------------------------------

    def predict(self, X, fp_values=None, include_noise: bool = True) -> PredictiveDistribution:
        """Predictive mean and variance in original units.

        The variance includes the observation-noise term unless
        ``include_noise`` is False.
        """
        self._check_fitted()
        X = as_2d(X)
        fq_raw = self._fp(X, fp_values) if self.uses_fp else np.zeros(X.shape[0])
        Xq = self.stdz.transform(X)
        fq = fq_raw / self.f_scale
        var = self._prior_var(self.theta, fq)
        mean = fq_raw.copy() if self.physics_mean else np.zeros(X.shape[0])
        if self.X_train.shape[0]:
            Xs, _, ft = self._standardized_train()
            q = self._cross_cov(self.theta, Xs, ft, Xq, fq)
            mean = mean + self.r_scale * (q.T @ self.alpha)
            v = self.factor.solve_lower(q)
            var = var - np.sum(v * v, axis=0)
        if include_noise:
            var = var + self.noise_variance(self.theta)
        var = np.maximum(var, 0.0) * self.r_scale**2
        return PredictiveDistribution(mean, var)

    def prior_variance(self, X, fp_values=None, include_noise: bool = True) -> np.ndarray:
        """Variance of the prior (no conditioning) at ``X`` in original units."""
        self._check_fitted()
        X = as_2d(X)
        fq = (self._fp(X, fp_values) if self.uses_fp else np.zeros(X.shape[0])) / self.f_scale
        var = self._prior_var(self.theta, fq)
        if include_noise:
            var = var + self.noise_variance(self.theta)
        return var * self.r_scale**2

    def max_lengthscale(self) -> float:
        """Largest lengthscale over all channels, in original input units."""
        return max(float(np.max(kp.lengthscales * self.stdz.std)) for kp in self.kernel_params())

    def nlml_at(self, theta) -> float:
        Xs, rs, ft = self._standardized_train()
        return self._objective(Xs, rs, ft)(np.asarray(theta, dtype=float))[0]

    # -- persistence ------------------------------------------------------------

    def to_state(self) -> dict:
        self._check_fitted()
        return {
            "kind": self.kind,
            "theta": self.theta,
            "X": self.X_train,
            "y": self.y_train,
            "fp_train": self.fp_train,
            "x_mean": self.stdz.mean,
            "x_std": self.stdz.std,
            "r_scale": self.r_scale,
            "f_scale": self.f_scale,
        }

    @classmethod
    def _blank(cls, state: dict, fp):
        return cls(fp=fp)

    @classmethod
    def from_state(cls, state: dict, fp=None):
        model = cls._blank(state, fp)
        model.theta = np.asarray(state["theta"], dtype=float)
        model.X_train = np.asarray(state["X"], dtype=float)
        model.y_train = np.asarray(state["y"], dtype=float)
        model.fp_train = np.asarray(state["fp_train"], dtype=float)
        model.stdz = Standardizer(np.asarray(state["x_mean"]), np.asarray(state["x_std"]))
        model.r_scale = float(state["r_scale"])
        model.f_scale = float(state["f_scale"])
        model._condition()
        model.fitted = True
        return model


class GaussianProcess(_KernelGP):
    """Standard GP with a single RBF kernel and either zero or f_p prior mean."""

    channels = (False,)

    def __init__(self, fp=None, config=None, init_theta=None, physics_mean: bool = True):
        super().__init__(fp, config, init_theta)
        self.physics_mean = physics_mean
        self.kind = "phy-mean-gp" if physics_mean else "zero-mean-gp"

    def to_state(self) -> dict:
        state = super().to_state()
        state["physics_mean"] = self.physics_mean
        return state

    @classmethod
    def _blank(cls, state, fp):
        return cls(fp=fp, physics_mean=bool(state["physics_mean"]))


def ZeroMeanGP(fp=None, config=None, init_theta=None) -> GaussianProcess:
    return GaussianProcess(fp, config, init_theta, physics_mean=False)


def PhysicsMeanGP(fp=None, config=None, init_theta=None) -> GaussianProcess:
    return GaussianProcess(fp, config, init_theta, physics_mean=True)


class CKA(_KernelGP):
    """Co-kriging adjustment: y = ρ(x) f_p(x) + δ(x) + ε, ρ ~ GP(1, k_ρ), δ ~ GP(0, k_δ).

    Marginally y ~ N(f_p, F_p k_ρ F_p + k_δ + σ²I); parameters are ordered
    ρ-kernel, δ-kernel, noise.
    """

    kind = "cka"
    channels = (True, False)


class GPBias(_KernelGP):
    """Adjustment with the additive term only: y = f_p(x) + δ(x) + ε."""

    kind = "gp-bias"
    channels = (False,)


class GPScale(_KernelGP):
    """Adjustment with the multiplicative term only: y = ρ(x) f_p(x) + ε."""

    kind = "gp-scale"
    channels = (True,)
