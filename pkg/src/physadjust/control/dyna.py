"""Dyna-style training loop for the five pendulum scenarios."""

from __future__ import annotations

import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..numerics import OptimizerConfig
from ..physics import PENDULUM_STATE_BOX, make_perturbed_pendulum
from ..surrogates import FitConfig
from ..surrogates.dynamics import PHYSICS_KIND, DynamicsModel, fit_dynamics
from .buffers import ReplayBuffers
from .env import EpisodeSpec, PendulumEnv, pendulum_cost, pendulum_observation
from .rollout import run_model_episodes, run_real_episode
from .sac import SacAgent, SacConfig, sac_update

logger = logging.getLogger(__name__)

#: scenario name -> dynamics model kind (None: no model)
SCENARIOS = {
    "MF": None,
    "Dyna-Phy": PHYSICS_KIND,
    "Dyna-GP": "zero-mean-gp",
    "Dyna-CKA": "cka",
    "Dyna-RRA": "rra",
}


class ScenarioError(RuntimeError):
    pass


def default_dynamics_fit_config() -> FitConfig:
    """Cheaper hyperparameter search for repeated refits on up to 625 points."""
    return FitConfig(
        optimizer=OptimizerConfig(steps=150, restarts=1, n_screen=32),
        max_opt_points=200,
    )


@dataclass(frozen=True)
class DynaConfig:
    trials: int = 50
    model_trials_per_real: int = 20
    #: model-based training stops after this many real trials
    model_based_cutoff: int = 25
    #: empty D_M once model-based training stops
    clear_model_buffer_after_cutoff: bool = True
    real_capacity: int = 100_000
    model_capacity: int = 100_000
    episode: EpisodeSpec = field(default_factory=EpisodeSpec)
    sac: SacConfig = field(default_factory=SacConfig)
    fit: FitConfig = field(default_factory=default_dynamics_fit_config)
    #: warm-started refits skip the restart screen
    warm_start: bool = True


@dataclass
class ScenarioResult:
    scenario: str
    seed: int
    curve: list
    logs: list
    refit_count: int
    real_steps: int
    physics_params: dict


def _warm_fit_config(cfg: FitConfig) -> FitConfig:
    return dataclasses.replace(cfg, optimizer=dataclasses.replace(cfg.optimizer, restarts=0))


def run_dyna_scenario(scenario: str, config: DynaConfig | None = None, seed=0, log_fn=None) -> ScenarioResult:
    """Train SAC on the pendulum under one scenario and return its learning curve.

    Each real trial: run one episode on the true system, add it to D_R and
    take the real-trial SAC steps. During the model-based phase the dynamics
    model is then refitted on all real data and 20 model episodes are rolled
    out into D_M, each followed by the model-trial SAC steps.

    ``log_fn`` receives one dict per real trial; by default records go to
    the module logger as JSON.
    """
    if scenario not in SCENARIOS:
        raise ScenarioError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    cfg = config or DynaConfig()
    kind = SCENARIOS[scenario]
    spec = cfg.episode
    ss = np.random.SeedSequence(seed)
    s_phys, s_agent, s_real, s_model, s_sac, s_fit = ss.spawn(6)

    env = PendulumEnv(spec=spec)
    physics = make_perturbed_pendulum(s_phys)
    agent = SacAgent(5, 1, spec.action_low, spec.action_high, cfg.sac, seed=s_agent,
                     observe=pendulum_observation)
    buffers = ReplayBuffers(spec.state_dim, 1, cfg.real_capacity, cfg.model_capacity)
    rng_real = np.random.default_rng(s_real)
    rng_model = np.random.default_rng(s_model)
    rng_sac = np.random.default_rng(s_sac)
    fit_seed = int(s_fit.generate_state(1)[0])
    base_fit = dataclasses.replace(cfg.fit, seed=fit_seed)
    cost_fn = lambda S: pendulum_cost(S, env.params)  # noqa: E731

    curve, logs = [], []
    refits = 0
    dynamics: DynamicsModel | None = None
    emit = log_fn or (lambda rec: logger.info(json.dumps(rec)))
    for trial in range(1, cfg.trials + 1):
        t0 = time.perf_counter()
        try:
            transitions, cost = run_real_episode(env, agent, spec, rng_real)
            buffers.extend(transitions)
            sac_update(agent, buffers, cfg.sac.batch_size, cfg.sac.steps_per_real_trial, rng_sac)
            nlml = []
            model_based = kind is not None and trial <= cfg.model_based_cutoff
            if model_based:
                if kind == PHYSICS_KIND:
                    if dynamics is None:
                        dynamics = fit_dynamics([], physics, PHYSICS_KIND, box=PENDULUM_STATE_BOX)
                else:
                    warm = dynamics if cfg.warm_start else None
                    fit_cfg = _warm_fit_config(base_fit) if warm is not None else base_fit
                    dynamics = fit_dynamics(buffers.real.transitions(), physics, kind, fit_cfg,
                                            box=PENDULUM_STATE_BOX, warm_start=warm)
                    refits += 1
                    nlml = dynamics.fit_nlml()
                episodes = run_model_episodes(dynamics, agent, spec, rng_model,
                                              cfg.model_trials_per_real, cost_fn)
                for ep in episodes:
                    buffers.extend(ep)
                    sac_update(agent, buffers, cfg.sac.batch_size, cfg.sac.steps_per_model_trial, rng_sac)
            elif trial == cfg.model_based_cutoff + 1 and cfg.clear_model_buffer_after_cutoff:
                buffers.model.clear()
        except Exception as exc:
            raise ScenarioError(f"{scenario} seed {seed} trial {trial}: {exc}") from exc
        curve.append(cost)
        rec = {
            "scenario": scenario,
            "seed": int(seed) if np.isscalar(seed) else str(seed),
            "trial": trial,
            "cost": cost,
            "real_size": len(buffers.real),
            "model_size": len(buffers.model),
            "fit_nlml": nlml,
            "wall_time": time.perf_counter() - t0,
        }
        logs.append(rec)
        emit(rec)
    return ScenarioResult(scenario, seed, curve, logs, refits, len(buffers.real), physics.describe())


def trials_to_threshold(curve, threshold: float = 0.5):
    """1-based index of the first trial with cost below ``threshold``, else None."""
    for i, c in enumerate(curve):
        if c < threshold:
            return i + 1
    return None
