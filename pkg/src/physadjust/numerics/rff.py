"""Random Fourier features approximating the RBF kernel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RFFMap:
    """Frozen random feature map x -> √(2/D) cos(-ωx + b)."""

    omega: np.ndarray  # (D, d)
    b: np.ndarray  # (D,)
    lengthscale: float

    @property
    def n_features(self) -> int:
        return self.omega.shape[0]

    @property
    def input_dim(self) -> int:
        return self.omega.shape[1]


def make_rff_map(d: int, D: int, lengthscale: float, rng_seed) -> RFFMap:
    """Draw ω ~ N(0, I/l²) and b ~ U[0, 2π).

    With this frequency variance E[Φ(x)·Φ(y)] equals the unit-amplitude RBF
    kernel with lengthscale ``lengthscale``.
    """
    if D < 1:
        raise ValueError(f"need at least one feature, got D={D}")
    if not lengthscale > 0:
        raise ValueError(f"lengthscale must be positive, got {lengthscale}")
    rng = np.random.default_rng(rng_seed)
    omega = rng.standard_normal((D, d)) / lengthscale
    b = rng.uniform(0.0, 2.0 * np.pi, size=D)
    return RFFMap(omega, b, float(lengthscale))


def rff_features(rff: RFFMap, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != rff.input_dim:
        raise ValueError(f"input has {X.shape[1]} columns, feature map expects {rff.input_dim}")
    return np.sqrt(2.0 / rff.n_features) * np.cos(-X @ rff.omega.T + rff.b)
