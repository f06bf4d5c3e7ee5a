"""Cart-pole swing-up task: cost, episode settings and the true environment."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..physics import TRUE_PENDULUM, OdeStepConfig, PendulumModel, PendulumParams


def pendulum_cost(state, params: PendulumParams = TRUE_PENDULUM):
    """Saturating distance cost 1 - exp(-2 d²) of the pole tip to the goal.

    With θ = π hanging down the tip sits at (x + l sin θ, l cos θ) relative to
    the pivot height, and the goal is the upright tip position (0, l).
    Works on a single state or on rows of states.
    """
    s = np.asarray(state, dtype=float)
    x, theta = s[..., 0], s[..., 1]
    l = params.l
    dx = x + l * np.sin(theta)
    dy = l * np.cos(theta) - l
    return 1.0 - np.exp(-2.0 * (dx * dx + dy * dy))


def pole_tip(state, params: PendulumParams = TRUE_PENDULUM) -> np.ndarray:
    s = np.asarray(state, dtype=float)
    return np.stack([s[..., 0] + params.l * np.sin(s[..., 1]), params.l * np.cos(s[..., 1])], axis=-1)


def pendulum_observation(state) -> np.ndarray:
    """Policy features [x, sin θ, cos θ, ẋ, θ̇]; removes the angle wrap-around."""
    s = np.asarray(state, dtype=float)
    return np.stack([s[..., 0], np.sin(s[..., 1]), np.cos(s[..., 1]), s[..., 2], s[..., 3]], axis=-1)


@dataclass(frozen=True)
class EpisodeSpec:
    horizon: int = 25
    dt: float = 0.1
    initial_state_mean: tuple = (0.0, np.pi, 0.0, 0.0)
    #: Σ₀^{1/2} diagonal
    initial_state_std: tuple = (0.2, 0.2, 0.2, 0.2)
    action_low: float = -10.0
    action_high: float = 10.0

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.action_low < self.action_high:
            raise ValueError("action_low must be below action_high")
        if len(self.initial_state_mean) != len(self.initial_state_std):
            raise ValueError("initial state mean and std differ in length")

    @property
    def state_dim(self) -> int:
        return len(self.initial_state_mean)

    def sample_initial_state(self, rng, n: int | None = None) -> np.ndarray:
        mu = np.asarray(self.initial_state_mean, dtype=float)
        sd = np.asarray(self.initial_state_std, dtype=float)
        shape = mu.shape if n is None else (n, mu.size)
        return mu + sd * rng.standard_normal(shape)


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: np.ndarray
    cost: float
    next_state: np.ndarray
    is_model_generated: bool = False

    def __post_init__(self):
        if not np.isfinite(self.cost):
            raise ValueError("transition cost must be finite")
        for name in ("state", "action", "next_state"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"transition {name} must be finite")
        if np.shape(self.state) != np.shape(self.next_state):
            raise ValueError("state and next_state differ in shape")


@dataclass
class PendulumEnv:
    """The real system: true parameters, integrated with RK4."""

    params: PendulumParams = TRUE_PENDULUM
    spec: EpisodeSpec = field(default_factory=EpisodeSpec)
    substeps: int = 8

    def __post_init__(self):
        self.model = PendulumModel(self.params, OdeStepConfig(self.spec.dt, self.substeps))

    def step(self, state, action) -> np.ndarray:
        return self.model.next_state(state, action)

    def cost(self, state):
        return pendulum_cost(state, self.params)
