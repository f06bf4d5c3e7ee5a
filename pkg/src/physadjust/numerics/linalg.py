"""Cholesky factorization with bounded jitter escalation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

INITIAL_JITTER = 1e-8
MAX_JITTER = 1e-2


class NumericalFailure(RuntimeError):
    """Raised when a matrix stays indefinite at the largest allowed jitter."""

    def __init__(self, message: str, jitter: float):
        super().__init__(message)
        self.jitter = jitter


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower-triangular L with L Lᵀ = A + jitter_used·I."""

    lower_triangular: np.ndarray
    jitter_used: float

    @property
    def size(self) -> int:
        return self.lower_triangular.shape[0]

    def solve(self, B) -> np.ndarray:
        return cho_solve((self.lower_triangular, True), B, check_finite=False)

    def solve_lower(self, B) -> np.ndarray:
        """Return L⁻¹ B."""
        return solve_triangular(self.lower_triangular, B, lower=True, check_finite=False)

    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.lower_triangular))))

    def inverse(self) -> np.ndarray:
        return self.solve(np.eye(self.size))


def cholesky(A, initial_jitter=INITIAL_JITTER, max_jitter=MAX_JITTER) -> CholeskyFactor:
    """Factor a symmetric matrix, adding relative jitter until it succeeds.

    Jitter starts at ``initial_jitter * mean(diag(A))`` and grows by 10x up
    to ``max_jitter * mean(diag(A))``. With ``initial_jitter=0`` the exact
    matrix is tried first and escalation then begins at ``INITIAL_JITTER``.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n == 0:
        return CholeskyFactor(np.zeros((0, 0)), 0.0)
    if not np.all(np.isfinite(A)):
        raise NumericalFailure("matrix has non-finite entries", 0.0)
    scale = float(np.mean(np.diag(A)))
    if not scale > 0.0:
        scale = 1.0
    rel = initial_jitter
    eye = np.eye(n)
    while rel <= max_jitter * (1 + 1e-9):
        jitter = rel * scale
        try:
            L = np.linalg.cholesky(A + jitter * eye)
        except np.linalg.LinAlgError:
            rel = rel * 10.0 if rel > 0 else INITIAL_JITTER
            continue
        return CholeskyFactor(L, jitter)
    raise NumericalFailure(
        f"matrix not positive definite with jitter up to {max_jitter * scale:.3g}",
        max_jitter * scale,
    )


def cholesky_solve(A, B):
    """Solve (A + jitter·I) X = B; returns ``(X, factor)``."""
    factor = cholesky(A)
    B = np.asarray(B, dtype=float)
    if B.shape[0] != factor.size:
        raise ValueError(f"right-hand side has {B.shape[0]} rows, matrix is {factor.size}")
    return factor.solve(B), factor
