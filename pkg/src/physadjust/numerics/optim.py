"""Seeded multi-restart Adam for log-space hyperparameters."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .linalg import NumericalFailure

logger = logging.getLogger(__name__)


class OptimizationFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    steps: int = 500
    learning_rate: float = 0.05
    restarts: int = 3
    #: "screen": restarts begin at the best of ``n_screen`` uniform draws
    #: inside the bounds; "perturb": initial point plus N(0, restart_scale²)
    restart_mode: str = "screen"
    n_screen: int = 256
    restart_scale: float = 1.0
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class OptimizeResult:
    params: np.ndarray
    value: float
    initial_value: float
    #: best-so-far objective after every step of every run, concatenated
    trace: list = field(default_factory=list)
    n_evals: int = 0


def _safe_eval(objective, x):
    try:
        value, grad = objective(x)
    except (NumericalFailure, FloatingPointError, np.linalg.LinAlgError):
        return np.inf, None
    value = float(value)
    grad = np.asarray(grad, dtype=float)
    if not np.isfinite(value) or not np.all(np.isfinite(grad)):
        return np.inf, None
    return value, grad


def _adam_run(objective, x0, config, lower, upper, result):
    x = np.clip(np.array(x0, dtype=float), lower, upper)
    value, grad = _safe_eval(objective, x)
    result.n_evals += 1
    if grad is None:
        return None, np.inf
    best_x, best_val = x.copy(), value
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    lr = config.learning_rate
    b1, b2 = config.beta1, config.beta2
    for t in range(1, config.steps + 1):
        m = b1 * m + (1 - b1) * grad
        v = b2 * v + (1 - b2) * grad * grad
        mhat = m / (1 - b1**t)
        vhat = v / (1 - b2**t)
        step = lr * mhat / (np.sqrt(vhat) + config.eps)
        x_new = np.clip(x - step, lower, upper)
        val_new, grad_new = _safe_eval(objective, x_new)
        result.n_evals += 1
        if grad_new is None:
            # stay put and shrink the step; give up once it is negligible
            lr *= 0.5
            if lr < 1e-6:
                break
            continue
        x, value, grad = x_new, val_new, grad_new
        if value < best_val:
            best_x, best_val = x.copy(), value
        result.trace.append(best_val)
    return best_x, best_val


def _restart_points(objective, x0, config, lower, upper, rng, result):
    n = config.restarts
    if n <= 0:
        return []
    bounded = np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))
    if config.restart_mode == "perturb" or not bounded:
        return [x0 + config.restart_scale * rng.standard_normal(x0.shape) for _ in range(n)]
    if config.restart_mode != "screen":
        raise ValueError(f"unknown restart mode {config.restart_mode!r}")
    cands = rng.uniform(lower, upper, size=(max(config.n_screen, n), x0.size))
    values = np.array([_safe_eval(objective, c)[0] for c in cands])
    result.n_evals += len(cands)
    order = np.argsort(values, kind="stable")
    return [cands[i] for i in order[:n]]


def optimize_hyperparams(objective, initial_params, config: OptimizerConfig | None = None,
                         lower=None, upper=None) -> OptimizeResult:
    """Minimize ``objective`` with Adam from the initial point plus restarts.

    ``objective(x)`` returns ``(value, gradient)``. By default restarts begin
    at the lowest-objective points among ``n_screen`` uniform draws inside
    the bounds; with ``restart_mode="perturb"`` they are the initial point
    plus ``N(0, restart_scale²)`` noise. All draws come from ``config.seed``.
    The best iterate over all runs is returned, so the final value never
    exceeds the value at the initial point.

    Raises
    ------
    OptimizationFailure
        If the objective is non-finite at the starting point of every run.
    """
    config = config or OptimizerConfig()
    x0 = np.asarray(initial_params, dtype=float).ravel()
    lower = np.full_like(x0, -np.inf) if lower is None else np.broadcast_to(lower, x0.shape)
    upper = np.full_like(x0, np.inf) if upper is None else np.broadcast_to(upper, x0.shape)
    rng = np.random.default_rng(config.seed)
    result = OptimizeResult(params=x0.copy(), value=np.inf, initial_value=np.inf)
    init_val, _ = _safe_eval(objective, np.clip(x0, lower, upper))
    result.initial_value = init_val
    starts = [x0] + _restart_points(objective, x0, config, lower, upper, rng, result)
    for i, start in enumerate(starts):
        x, val = _adam_run(objective, start, config, lower, upper, result)
        if x is None:
            logger.debug("restart %d: objective non-finite at start", i)
            continue
        if val < result.value:
            result.params, result.value = x, val
    if not np.isfinite(result.value):
        raise OptimizationFailure("objective non-finite at every starting point")
    return result
