"""ARD squared-exponential kernel and its log-parameter derivatives."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KernelParams:
    """RBF hyperparameters kept in log-space.

    Attributes
    ----------
    log_lengthscales : ndarray, shape (d,)
        One log-lengthscale per input dimension.
    log_signal_variance : float
        Log of the kernel amplitude s².
    """

    log_lengthscales: np.ndarray
    log_signal_variance: float = 0.0

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.log_lengthscales, dtype=float))
        object.__setattr__(self, "log_lengthscales", ls)
        object.__setattr__(self, "log_signal_variance", float(self.log_signal_variance))

    @classmethod
    def default(cls, dim: int) -> "KernelParams":
        return cls(np.zeros(dim), 0.0)

    @property
    def dim(self) -> int:
        return self.log_lengthscales.shape[0]

    @property
    def lengthscales(self) -> np.ndarray:
        return np.exp(self.log_lengthscales)

    @property
    def signal_variance(self) -> float:
        return float(np.exp(self.log_signal_variance))

    @property
    def size(self) -> int:
        return self.dim + 1

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.log_lengthscales, [self.log_signal_variance]])

    @classmethod
    def from_vector(cls, v) -> "KernelParams":
        v = np.asarray(v, dtype=float)
        return cls(v[:-1].copy(), float(v[-1]))


@dataclass(frozen=True)
class NoiseParam:
    """Gaussian observation noise σ stored as log σ."""

    log_noise_std: float = float(np.log(0.1))

    def __post_init__(self):
        object.__setattr__(self, "log_noise_std", float(self.log_noise_std))

    @property
    def std(self) -> float:
        return float(np.exp(self.log_noise_std))

    @property
    def variance(self) -> float:
        return float(np.exp(2.0 * self.log_noise_std))


def _check_dims(X1, X2, params):
    X1 = np.atleast_2d(np.asarray(X1, dtype=float))
    X2 = np.atleast_2d(np.asarray(X2, dtype=float))
    d = params.dim
    if X1.shape[1] != d or X2.shape[1] != d:
        raise ValueError(
            f"input dimension mismatch: X1 has {X1.shape[1]} columns, "
            f"X2 has {X2.shape[1]}, kernel expects {d}"
        )
    return X1, X2


def scaled_sq_dists(X1, X2, params: KernelParams) -> np.ndarray:
    """Per-dimension squared distances divided by l_k², shape (d, n, m)."""
    X1, X2 = _check_dims(X1, X2, params)
    ls = params.lengthscales
    diff = (X1.T[:, :, None] - X2.T[:, None, :]) / ls[:, None, None]
    return diff * diff


def rbf_kernel(X1, X2, params: KernelParams) -> np.ndarray:
    """Evaluate s² exp(-½ Σ_k (x_k - x'_k)² / l_k²) between two point sets.

    Parameters
    ----------
    X1 : array_like, shape (n, d)
    X2 : array_like, shape (m, d)
    params : KernelParams

    Returns
    -------
    ndarray, shape (n, m)

    Raises
    ------
    ValueError
        If either input's column count differs from the lengthscale count.
    """
    D2 = scaled_sq_dists(X1, X2, params)
    return params.signal_variance * np.exp(-0.5 * D2.sum(axis=0))


def rbf_kernel_and_grads(X, params: KernelParams):
    """Gram matrix on ``X`` plus its derivatives w.r.t. each log-parameter.

    The derivative list follows ``params.to_vector()`` order: one matrix per
    log-lengthscale, then the log signal variance.
    """
    D2 = scaled_sq_dists(X, X, params)
    K = params.signal_variance * np.exp(-0.5 * D2.sum(axis=0))
    grads = [K * D2[k] for k in range(params.dim)]
    grads.append(K)
    return K, grads
