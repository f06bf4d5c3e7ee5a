"""Shared types for the surrogate models."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from ..numerics import OptimizerConfig

STD_FLOOR = 1e-8


class NotFittedError(RuntimeError):
    pass


class InvalidConfigError(ValueError):
    pass


class FitError(RuntimeError):
    pass


@dataclass(frozen=True)
class PredictiveDistribution:
    """Diagonal Gaussian over the outputs at each query point."""

    mean: np.ndarray
    variance: np.ndarray

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)


@dataclass
class Dataset:
    """Training inputs ``X`` (N, d) and outputs ``y`` (N,) or (N, m)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim == 1:
            self.X = self.X.reshape(-1, 1)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError(f"X has {self.X.shape[0]} rows but y has {self.y.shape[0]}")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("dataset contains non-finite entries")

    def __len__(self):
        return self.X.shape[0]

    @property
    def input_dim(self) -> int:
        return self.X.shape[1]


def rms_scale(v) -> float:
    """Root-mean-square magnitude, falling back to 1 for empty or ~zero input."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return 1.0
    s = float(np.sqrt(np.mean(v * v)))
    return s if s > STD_FLOOR else 1.0


@dataclass(frozen=True)
class Standardizer:
    """Per-column centring and scaling of inputs."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def identity(cls, dim: int) -> "Standardizer":
        return cls(np.zeros(dim), np.ones(dim))

    @classmethod
    def from_data(cls, X) -> "Standardizer":
        X = np.asarray(X, dtype=float)
        if X.shape[0] < 2:
            mean = X.mean(axis=0) if X.shape[0] else np.zeros(X.shape[1])
            return cls(mean, np.ones(X.shape[1]))
        std = X.std(axis=0)
        # a constant column carries no scale information
        std = np.where(std > STD_FLOOR, std, 1.0)
        return cls(X.mean(axis=0), std)

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.std


@dataclass(frozen=True)
class ParamBounds:
    """Box constraints in standardized units for each hyperparameter kind."""

    log_lengthscale: tuple = (np.log(1e-2), np.log(1e2))
    log_signal_variance: tuple = (-12.0, 10.0)
    log_noise_std: tuple = (np.log(1e-4), np.log(2.0))
    rho: tuple = (-1e3, 1e3)


@dataclass(frozen=True)
class FitConfig:
    """Everything that controls fitting, shared by all model kinds."""

    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    optimize: bool = True
    bounds: ParamBounds = field(default_factory=ParamBounds)
    init_log_lengthscale: float = 0.0
    init_log_signal_variance: float = 0.0
    init_log_noise_std: float = float(np.log(0.1))
    #: subsample size used only while optimizing hyperparameters
    max_opt_points: int | None = None
    seed: int = 0
    ar1_n_low: int = 40
    ar1_low_box: tuple | None = None
    rra_features: int = 100
    #: a number, or "auto" to pick from the grid by evidence
    rra_lambda: float | str = "auto"
    #: in standardized input units; a number or "auto"
    rra_lengthscale: float | str = "auto"
    rra_lambda_grid: tuple = tuple(10.0 ** np.arange(-8, 2))
    rra_lengthscale_grid: tuple = tuple(np.logspace(0, 2, 9))
    rra_fallback_lengthscale: float = 1.0
    rra_fallback_lambda: float = 1.0
    rra_standardize_inputs: bool = True
    rra_prior_noise_var: float = 1.0


class SurrogateModel(ABC):
    """Scalar-output probabilistic model of y = f_a(f_p(x), x).

    ``fp`` maps an (n, d) input array to the physics prediction, shape (n,).
    Callers that already hold f_p at the relevant inputs may pass it as
    ``fp_values`` to skip re-evaluation.
    """

    kind: str = ""

    def __init__(self, fp=None, config: FitConfig | None = None):
        self.fp = fp
        self.config = config or FitConfig()
        self.fitted = False

    def _fp(self, X, fp_values=None) -> np.ndarray:
        if fp_values is not None:
            return np.asarray(fp_values, dtype=float).ravel()
        if self.fp is None:
            raise InvalidConfigError(f"{self.kind} needs a physics model")
        return np.asarray(self.fp(X), dtype=float).ravel()

    @abstractmethod
    def fit(self, X, y, fp_values=None) -> "SurrogateModel": ...

    @abstractmethod
    def predict(self, X, fp_values=None) -> PredictiveDistribution: ...

    @abstractmethod
    def to_state(self) -> dict:
        """Plain dict of arrays and scalars sufficient to rebuild the model."""

    @classmethod
    @abstractmethod
    def from_state(cls, state: dict, fp=None) -> "SurrogateModel": ...

    def _check_fitted(self):
        if not self.fitted:
            raise NotFittedError(f"{self.kind} model has not been fitted")


def as_2d(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return X
