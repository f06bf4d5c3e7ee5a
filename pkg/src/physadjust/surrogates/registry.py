from __future__ import annotations

from .ar1 import AR1CoKriging
from .base import Dataset, FitConfig, InvalidConfigError, PredictiveDistribution, SurrogateModel
from .gp import CKA, GaussianProcess, GPBias, GPScale
from .rra import RRA

MODEL_KINDS = ("zero-mean-gp", "phy-mean-gp", "gp-bias", "gp-scale", "ar1", "cka", "rra")


def make_model(kind: str, fp=None, config: FitConfig | None = None, init_theta=None) -> SurrogateModel:
    """Unfitted surrogate of the given kind bound to the scalar physics ``fp``."""
    if kind == "zero-mean-gp":
        return GaussianProcess(fp, config, init_theta, physics_mean=False)
    if kind == "phy-mean-gp":
        return GaussianProcess(fp, config, init_theta, physics_mean=True)
    if kind == "gp-bias":
        return GPBias(fp, config, init_theta)
    if kind == "gp-scale":
        return GPScale(fp, config, init_theta)
    if kind == "cka":
        return CKA(fp, config, init_theta)
    if kind == "ar1":
        return AR1CoKriging(fp, config)
    if kind == "rra":
        return RRA(fp, config)
    raise InvalidConfigError(f"unknown model kind {kind!r}; choose from {', '.join(MODEL_KINDS)}")


def fit(kind: str, data: Dataset, physics=None, config: FitConfig | None = None) -> SurrogateModel:
    """Fit a single-output surrogate.

    ``physics`` is either a PhysicsModel with one output or a callable on
    (n, d) arrays. Multi-output data goes through ``fit_dynamics`` instead.
    """
    y = data.y
    if y.ndim == 2:
        if y.shape[1] != 1:
            raise ValueError("fit() handles one output; use fit_dynamics for vector outputs")
        y = y[:, 0]
    fp = None
    if physics is not None:
        fp = physics.component(0) if hasattr(physics, "component") else physics
    kinds_needing_data = ("zero-mean-gp", "phy-mean-gp", "gp-bias", "gp-scale", "ar1")
    if len(data) == 0 and kind in kinds_needing_data:
        raise InvalidConfigError(f"{kind} needs at least one observation")
    return make_model(kind, fp, config).fit(data.X, y)


def predict(model: SurrogateModel, X) -> PredictiveDistribution:
    return model.predict(X)
