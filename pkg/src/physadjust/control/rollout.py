"""Real-system episodes and particle rollouts through a learned dynamics model."""

from __future__ import annotations

import numpy as np

from ..physics import PENDULUM_STATE_BOX, DomainBox, IntegrationError
from ..surrogates.dynamics import DynamicsModel, predict_next_state
from .env import EpisodeSpec, PendulumEnv, Transition


class EpisodeError(RuntimeError):
    pass


def run_real_episode(env: PendulumEnv, agent, spec: EpisodeSpec, rng, deterministic: bool = False):
    """Roll the policy on the true system for one trial.

    Returns the transitions and the normalized episode cost, i.e. the mean
    per-step cost of the visited next states.

    Raises
    ------
    EpisodeError
        If the state becomes non-finite.
    """
    s = spec.sample_initial_state(rng)
    transitions = []
    for step in range(spec.horizon):
        a = agent.act(s[None, :], rng, deterministic=deterministic)[0]
        try:
            s1 = env.step(s, a)
        except IntegrationError as exc:
            raise EpisodeError(f"real episode diverged at step {step}: {exc}") from exc
        if not np.all(np.isfinite(s1)):
            raise EpisodeError(f"real episode produced a non-finite state at step {step}")
        transitions.append(Transition(s.copy(), np.atleast_1d(a).copy(), float(env.cost(s1)), s1.copy(), False))
        s = s1
    return transitions, float(np.mean([t.cost for t in transitions]))


def run_model_episodes(dynamics: DynamicsModel, agent, spec: EpisodeSpec, rng, n_episodes: int,
                       cost_fn, box: DomainBox = PENDULUM_STATE_BOX, variance_scale: float = 1.0):
    """Roll ``n_episodes`` particles through the model in lockstep.

    Each next state is one Gaussian draw from the per-dimension predictive
    distribution, clipped to ``box``. A particle whose draw is non-finite
    stops there, so its episode is shorter than the horizon.

    Returns a list with one transition list per particle.
    """
    S = spec.sample_initial_state(rng, n_episodes)
    alive = np.ones(n_episodes, dtype=bool)
    episodes = [[] for _ in range(n_episodes)]
    sd_scale = np.sqrt(variance_scale)
    for _ in range(spec.horizon):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        A = agent.act(S[idx], rng).reshape(idx.size, -1)
        z = rng.standard_normal((idx.size, S.shape[1]))
        with np.errstate(invalid="ignore", over="ignore"):
            pd = predict_next_state(dynamics, S[idx], A)
            S1 = box.clip(pd.mean + sd_scale * np.sqrt(pd.variance) * z)
        ok = np.all(np.isfinite(S1), axis=1)
        costs = cost_fn(S1)
        for k, i in enumerate(idx):
            if not ok[k]:
                alive[i] = False
                continue
            episodes[i].append(Transition(S[i].copy(), A[k].copy(), float(costs[k]), S1[k].copy(), True))
            S[i] = S1[k]
    return episodes


def run_model_episode(dynamics: DynamicsModel, agent, spec: EpisodeSpec, rng, cost_fn,
                      box: DomainBox = PENDULUM_STATE_BOX, variance_scale: float = 1.0) -> list:
    """Single-particle version of :func:`run_model_episodes`."""
    return run_model_episodes(dynamics, agent, spec, rng, 1, cost_fn, box, variance_scale)[0]
