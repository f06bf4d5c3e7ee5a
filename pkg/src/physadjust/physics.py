"""Crude physics-derived models: Forrester pair and the cart-pole ODE.

Angle convention for the cart-pole: θ = π is the pendulum hanging straight
down and θ = 0 is upright. θ is not wrapped.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field

import numpy as np

GRAVITY = 9.81


class IntegrationError(RuntimeError):
    def __init__(self, message: str, substep: int):
        super().__init__(message)
        self.substep = substep


class PhysicsModel(ABC):
    """A deterministic crude model f_p mapping input rows to output rows."""

    input_dim: int
    output_dim: int

    @abstractmethod
    def evaluate(self, X) -> np.ndarray:
        """Map inputs of shape (n, input_dim) to outputs of shape (n, output_dim)."""

    def __call__(self, X) -> np.ndarray:
        return self.evaluate(X)

    def component(self, j: int):
        """Scalar f_p for output dimension ``j`` as a callable on (n, d) arrays."""
        return lambda X: self.evaluate(X)[:, j]


class FunctionModel(PhysicsModel):
    """Wrap a vectorized scalar function of a single input as a PhysicsModel."""

    def __init__(self, fn, input_dim: int = 1, name: str = "function"):
        self.fn = fn
        self.input_dim = input_dim
        self.output_dim = 1
        self.name = name

    def evaluate(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.input_dim:
            raise ValueError(f"expected {self.input_dim} input columns, got {X.shape[1]}")
        arg = X[:, 0] if self.input_dim == 1 else X
        return np.asarray(self.fn(arg), dtype=float).reshape(-1, 1)


# --------------------------------------------------------------------------
# Forrester
# --------------------------------------------------------------------------


def forrester_true(x):
    x = np.asarray(x, dtype=float)
    return 0.25 * (6.0 * x - 2.0) ** 2 * np.sin(12.0 * x - 4.0)


def forrester_crude(x):
    x = np.asarray(x, dtype=float)
    return 0.25 * (forrester_true(x) / 2.0 + 10.0 * (x - 0.5) + 5.0)


def forrester_physics() -> FunctionModel:
    return FunctionModel(forrester_crude, 1, name="forrester_crude")


# --------------------------------------------------------------------------
# Cart-pole
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PendulumParams:
    m_c: float = 0.5
    m_p: float = 0.5
    l: float = 0.6
    b: float = 0.1
    g: float = GRAVITY

    def __post_init__(self):
        if not (self.m_c > 0 and self.m_p > 0 and self.l > 0):
            raise ValueError(f"masses and length must be positive: {self}")
        if self.b < 0:
            raise ValueError(f"damping must be non-negative, got {self.b}")
        if not self.g > 0:
            raise ValueError(f"gravity must be positive, got {self.g}")


TRUE_PENDULUM = PendulumParams()


@dataclass(frozen=True)
class OdeStepConfig:
    step_size: float = 0.1
    substeps: int = 8

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError(f"step size must be positive, got {self.step_size}")
        if self.substeps < 1:
            raise ValueError(f"need at least one substep, got {self.substeps}")

    @property
    def h(self) -> float:
        return self.step_size / self.substeps


def pendulum_ode(state, action, params: PendulumParams = TRUE_PENDULUM) -> np.ndarray:
    """Time derivative of [x, θ, ẋ, θ̇] for a uniform rod on a cart.

    Vectorized over leading axes of ``state`` (..., 4) and ``action`` (...).
    """
    state = np.asarray(state, dtype=float)
    a = np.asarray(action, dtype=float)
    if a.ndim == state.ndim and a.shape[-1:] == (1,):
        a = a[..., 0]
    xd, th, thd = state[..., 2], state[..., 1], state[..., 3]
    mc, mp, l, b, g = params.m_c, params.m_p, params.l, params.b, params.g
    M = mc + mp
    s, c = np.sin(th), np.cos(th)
    den = 4.0 * M - 3.0 * mp * c * c
    # gravity enters with the sign for θ measured from upright (θ=π hangs)
    xdd = (2.0 * mp * l * thd**2 * s - 3.0 * mp * g * s * c + 4.0 * a - 4.0 * b * xd) / den
    thdd = (-3.0 * mp * l * thd**2 * s * c + 6.0 * M * g * s - 6.0 * (a - b * xd) * c) / (l * den)
    return np.stack([xd, thd, xdd, thdd], axis=-1)


def pendulum_energy(state, params: PendulumParams = TRUE_PENDULUM):
    """Total mechanical energy (J), zero potential at pivot height."""
    state = np.asarray(state, dtype=float)
    th, xd, thd = state[..., 1], state[..., 2], state[..., 3]
    mc, mp, l, g = params.m_c, params.m_p, params.l, params.g
    kinetic = (
        0.5 * (mc + mp) * xd**2
        + 0.5 * mp * l * xd * thd * np.cos(th)
        + mp * l * l * thd**2 / 6.0
    )
    return kinetic + mp * g * 0.5 * l * np.cos(th)


def integrate_step(ode, state, action, config: OdeStepConfig = OdeStepConfig()) -> np.ndarray:
    """Classical RK4 over ``config.substeps`` equal slices of one step.

    ``ode(state, action)`` gives the derivative; the action is held constant.
    """
    s = np.array(state, dtype=float)
    h = config.h
    for k in range(config.substeps):
        k1 = ode(s, action)
        k2 = ode(s + 0.5 * h * k1, action)
        k3 = ode(s + 0.5 * h * k2, action)
        k4 = ode(s + h * k3, action)
        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(s)):
            raise IntegrationError(f"non-finite state after substep {k}", k)
    return s


@dataclass(frozen=True)
class DomainBox:
    lower: np.ndarray
    upper: np.ndarray

    def clip(self, X) -> np.ndarray:
        return np.clip(X, self.lower, self.upper)

    def contains(self, X) -> np.ndarray:
        X = np.asarray(X)
        return np.all((X >= self.lower) & (X <= self.upper), axis=-1)

    def sample(self, rng, n: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(n, self.lower.size))


#: pendulum input box over [x, θ, ẋ, θ̇, a]
PENDULUM_BOX = DomainBox(
    lower=np.array([-6.0, -2.0 * np.pi, -10.0, -25.0, -10.0]),
    upper=np.array([6.0, 4.0 * np.pi, 10.0, 25.0, 10.0]),
)
PENDULUM_STATE_BOX = DomainBox(PENDULUM_BOX.lower[:4].copy(), PENDULUM_BOX.upper[:4].copy())


@dataclass
class PendulumModel(PhysicsModel):
    """One-step cart-pole transition s_{t+1} = ∫ f_ODE(s_t, a_t) dt."""

    params: PendulumParams = TRUE_PENDULUM
    step: OdeStepConfig = field(default_factory=OdeStepConfig)
    input_dim: int = 5
    output_dim: int = 4

    def ode(self, state, action):
        return pendulum_ode(state, action, self.params)

    def next_state(self, state, action) -> np.ndarray:
        return integrate_step(self.ode, state, action, self.step)

    def evaluate(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.input_dim:
            raise ValueError(f"expected {self.input_dim} input columns, got {X.shape[1]}")
        return self.next_state(X[:, :4], X[:, 4])

    def describe(self) -> dict:
        return asdict(self.params)


PERTURBATION_RANGES = {"m_c": (0.4, 0.6), "m_p": (0.5, 0.7), "l": (0.5, 0.7)}


def make_perturbed_pendulum(rng_seed, step: OdeStepConfig | None = None) -> PendulumModel:
    """Mismatched physics model: masses and length drawn uniformly, no damping."""
    rng = np.random.default_rng(rng_seed)
    sampled = {k: float(rng.uniform(lo, hi)) for k, (lo, hi) in PERTURBATION_RANGES.items()}
    params = PendulumParams(b=0.0, **sampled)
    return PendulumModel(params=params, step=step or OdeStepConfig())
