"""Ridge regression adjustment over random Fourier features.

ρ(x) = 1 + Φ_ρ(x) β_ρ and δ(x) = Φ_δ(x) β_δ, so the fitted function is
f_p(x) + [Φ_ρ(x) f_p(x), Φ_δ(x)] β and ridge shrinkage of β pulls the model
back onto f_p rather than onto zero.

Read as Bayesian linear regression, β ~ N(0, σ²/λ I) and ε ~ N(0, σ² I).
When the feature lengthscale or λ is left as ``"auto"`` it is chosen on a
grid by the marginal likelihood of the residuals with σ² profiled out.
"""

from __future__ import annotations

import numpy as np

from ..numerics import NumericalFailure, RFFMap, cholesky, make_rff_map, rff_features
from ..numerics.likelihood import LOG_2PI
from .base import (
    FitConfig,
    FitError,
    InvalidConfigError,
    PredictiveDistribution,
    Standardizer,
    SurrogateModel,
    as_2d,
)


class SamplingError(RuntimeError):
    pass


def _is_auto(value, name: str) -> bool:
    if isinstance(value, str):
        if value != "auto":
            raise InvalidConfigError(f"{name} must be a number or 'auto', got {value!r}")
        return True
    return False


class RRA(SurrogateModel):
    """Ridge regression adjustment with a Gaussian posterior over β.

    The posterior covariance is σ̂² (ΦᵀΦ + λI)⁻¹ in coefficient space with
    σ̂² = (‖r − Φβ̂‖² + λ‖β̂‖²) / N, the noise variance that maximizes the
    evidence at the chosen λ. Predictive variance adds σ̂² to the
    feature-space quadratic form.
    """

    kind = "rra"

    def __init__(self, fp=None, config: FitConfig | None = None):
        super().__init__(fp, config)

    def _map(self, d: int, lengthscale: float, channel: int) -> RFFMap:
        cfg = self.config
        seed = np.random.SeedSequence([cfg.seed, 0x5A1]).spawn(2)[channel]
        return make_rff_map(d, cfg.rra_features, lengthscale, seed)

    @staticmethod
    def _log_evidence(Phi, r, lams):
        """Profiled log evidence of ``r`` for every λ in ``lams`` from one SVD.

        With Φ = U S Vᵀ, rᵀ(I + ΦΦᵀ/λ)⁻¹r and log|I + ΦΦᵀ/λ| are sums over the
        singular values, so the whole λ grid costs one decomposition.
        """
        N = r.size
        U, sv, _ = np.linalg.svd(Phi, full_matrices=False)
        proj = U.T @ r
        outside = max(float(r @ r - proj @ proj), 0.0)
        s2 = sv**2
        out = []
        for lam in lams:
            quad = outside + float(np.sum(proj**2 * lam / (lam + s2)))
            noise_var = max(quad / N, 1e-300)
            logdet = float(np.sum(np.log1p(s2 / lam)))
            out.append(-0.5 * (N * np.log(noise_var) + logdet + N + N * LOG_2PI))
        return np.array(out)

    def design(self, X, fpv) -> np.ndarray:
        """Concatenated features [Φ_ρ(x) f_p(x), Φ_δ(x)], shape (n, 2D)."""
        Xs = self.stdz.transform(X)
        return np.hstack([rff_features(self.map_rho, Xs) * fpv[:, None],
                          rff_features(self.map_delta, Xs)])

    def fit(self, X, y, fp_values=None):
        X = as_2d(X)
        y = np.asarray(y, dtype=float).ravel()
        N, d = X.shape
        fpv = self._fp(X, fp_values)
        self.X_train, self.y_train, self.fp_train = X.copy(), y.copy(), fpv.copy()
        if self.config.rra_standardize_inputs and N:
            self.stdz = Standardizer.from_data(X)
        else:
            self.stdz = Standardizer.identity(d)
        r = y - fpv
        cfg = self.config
        auto_l = _is_auto(cfg.rra_lengthscale, "rra_lengthscale")
        auto_lam = _is_auto(cfg.rra_lambda, "rra_lambda")
        # without data there is no evidence to compare, so use the fallbacks
        if auto_l:
            l_grid = cfg.rra_lengthscale_grid if N else (cfg.rra_fallback_lengthscale,)
        else:
            l_grid = (float(cfg.rra_lengthscale),)
        if auto_lam:
            lam_grid = cfg.rra_lambda_grid if N else (cfg.rra_fallback_lambda,)
        else:
            lam_grid = (float(cfg.rra_lambda),)

        # The two channels get independent lengthscales.
        Xs = self.stdz.transform(X)
        rho_maps = [self._map(d, float(l), 0) for l in l_grid]
        delta_maps = [self._map(d, float(l), 1) for l in l_grid]
        self.log_evidence = np.nan
        if len(rho_maps) * len(lam_grid) == 1:
            choice = (rho_maps[0], delta_maps[0], float(lam_grid[0]))
        else:
            rho_feats = [rff_features(m, Xs) * fpv[:, None] for m in rho_maps]
            delta_feats = [rff_features(m, Xs) for m in delta_maps]
            best = -np.inf
            choice = None
            for i, F_rho in enumerate(rho_feats):
                for j, F_delta in enumerate(delta_feats):
                    ev = self._log_evidence(np.hstack([F_rho, F_delta]), r, lam_grid)
                    k = int(np.argmax(ev))
                    if ev[k] > best:
                        best = float(ev[k])
                        choice = (rho_maps[i], delta_maps[j], float(lam_grid[k]))
            if choice is None:
                raise FitError("rra: evidence is not finite anywhere on the grid")
            self.log_evidence = best
        self.map_rho, self.map_delta, self.lam = choice

        Phi = self.design(X, fpv)
        P = Phi.shape[1]
        try:
            # λ > 0 already makes the system definite; jitter would bias β̂
            factor = cholesky(Phi.T @ Phi + self.lam * np.eye(P), initial_jitter=0.0)
        except NumericalFailure as exc:
            raise FitError(f"rra: {exc}") from exc
        self.beta_mean = factor.solve(Phi.T @ r)
        if N == 0:
            self.noise_var = float(cfg.rra_prior_noise_var)
        else:
            resid = r - Phi @ self.beta_mean
            quad = float(resid @ resid + self.lam * self.beta_mean @ self.beta_mean)
            self.noise_var = quad / N
        self.beta_cov = self.noise_var * factor.inverse()
        self.beta_cov = 0.5 * (self.beta_cov + self.beta_cov.T)
        self.fitted = True
        return self

    def predict(self, X, fp_values=None, include_noise: bool = True) -> PredictiveDistribution:
        self._check_fitted()
        X = as_2d(X)
        fpv = self._fp(X, fp_values)
        Phi = self.design(X, fpv)
        mean = fpv + Phi @ self.beta_mean
        var = np.einsum("ij,jk,ik->i", Phi, self.beta_cov, Phi)
        if include_noise:
            var = var + self.noise_var
        return PredictiveDistribution(mean, np.maximum(var, 0.0))

    def sample_function(self, rng_seed, tol: float = 1e-10):
        """Draw β once from its posterior and return the fixed function it defines.

        The returned callable takes inputs (n, d) and an optional
        ``fp_values`` array, like :meth:`predict`.
        """
        self._check_fitted()
        w, V = np.linalg.eigh(self.beta_cov)
        scale = max(float(np.max(np.abs(w))), 1.0) if w.size else 1.0
        if w.size and w.min() < -tol * scale:
            raise SamplingError(f"posterior covariance not PSD (min eigenvalue {w.min():.3g})")
        z = np.random.default_rng(rng_seed).standard_normal(w.size)
        beta = self.beta_mean + V @ (np.sqrt(np.clip(w, 0.0, None)) * z)

        def f(X, fp_values=None):
            X = as_2d(X)
            fpv = self._fp(X, fp_values)
            return fpv + self.design(X, fpv) @ beta

        f.beta = beta
        return f

    def to_state(self) -> dict:
        self._check_fitted()
        return {
            "kind": self.kind,
            "X": self.X_train,
            "y": self.y_train,
            "fp_train": self.fp_train,
            "x_mean": self.stdz.mean,
            "x_std": self.stdz.std,
            "omega_rho": self.map_rho.omega,
            "b_rho": self.map_rho.b,
            "omega_delta": self.map_delta.omega,
            "b_delta": self.map_delta.b,
            "lengthscale": self.map_rho.lengthscale,
            "lambda": self.lam,
            "beta_mean": self.beta_mean,
            "beta_cov": self.beta_cov,
            "noise_var": self.noise_var,
        }

    @classmethod
    def from_state(cls, state, fp=None):
        model = cls(fp=fp)
        l = float(state["lengthscale"])
        model.X_train = np.asarray(state["X"], dtype=float)
        model.y_train = np.asarray(state["y"], dtype=float)
        model.fp_train = np.asarray(state["fp_train"], dtype=float)
        model.stdz = Standardizer(np.asarray(state["x_mean"]), np.asarray(state["x_std"]))
        model.map_rho = RFFMap(np.asarray(state["omega_rho"]), np.asarray(state["b_rho"]), l)
        model.map_delta = RFFMap(np.asarray(state["omega_delta"]), np.asarray(state["b_delta"]), l)
        model.lam = float(state["lambda"])
        model.beta_mean = np.asarray(state["beta_mean"], dtype=float)
        model.beta_cov = np.asarray(state["beta_cov"], dtype=float)
        model.noise_var = float(state["noise_var"])
        model.fitted = True
        return model
