"""Gaussian negative log marginal likelihood and its gradient."""

from __future__ import annotations

import numpy as np

from .linalg import CholeskyFactor, cholesky

LOG_2PI = float(np.log(2.0 * np.pi))


def nlml(y_residual, K, factor: CholeskyFactor | None = None) -> float:
    """½ rᵀK⁻¹r + ½ log|K| + (N/2) log 2π, with the determinant from Cholesky."""
    r = np.asarray(y_residual, dtype=float).ravel()
    if factor is None:
        factor = cholesky(K)
    alpha = factor.solve(r)
    return 0.5 * float(r @ alpha) + 0.5 * factor.logdet() + 0.5 * r.size * LOG_2PI


def nlml_and_gradient(y_residual, K, dK, factor: CholeskyFactor | None = None):
    """Value and gradient of the NLML from one factorization.

    Parameters
    ----------
    y_residual : array_like, shape (N,)
        Observations minus the prior mean.
    K : ndarray, shape (N, N)
        Marginal covariance of the observations.
    dK : sequence of ndarray
        ∂K/∂θ_i for every log-parameter θ_i.
    factor : CholeskyFactor, optional
        Reuse an existing factorization of ``K``.

    Returns
    -------
    value : float
    grad : ndarray, shape (len(dK),)
        ½ tr((K⁻¹ − ααᵀ) ∂K/∂θ_i) with α = K⁻¹r.
    """
    r = np.asarray(y_residual, dtype=float).ravel()
    if factor is None:
        factor = cholesky(K)
    alpha = factor.solve(r)
    value = 0.5 * float(r @ alpha) + 0.5 * factor.logdet() + 0.5 * r.size * LOG_2PI
    W = factor.inverse() - np.outer(alpha, alpha)
    grad = 0.5 * np.einsum("ij,kij->k", W, np.asarray(dK)) if len(dK) else np.zeros(0)
    return value, grad


def nlml_gradient(y_residual, K, dK, factor: CholeskyFactor | None = None) -> np.ndarray:
    return nlml_and_gradient(y_residual, K, dK, factor)[1]
