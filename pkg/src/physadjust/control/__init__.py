from .buffers import BufferStateError, FifoBuffer, ReplayBuffers, real_count
from .dyna import (
    SCENARIOS,
    DynaConfig,
    ScenarioError,
    ScenarioResult,
    default_dynamics_fit_config,
    run_dyna_scenario,
    trials_to_threshold,
)
from .env import EpisodeSpec, PendulumEnv, Transition, pendulum_cost, pendulum_observation, pole_tip
from .nets import MLP, Adam
from .rollout import EpisodeError, run_model_episode, run_model_episodes, run_real_episode
from .sac import SacAgent, SacConfig, sac_update

__all__ = [
    "Adam",
    "BufferStateError",
    "DynaConfig",
    "EpisodeError",
    "EpisodeSpec",
    "FifoBuffer",
    "MLP",
    "PendulumEnv",
    "ReplayBuffers",
    "SCENARIOS",
    "SacAgent",
    "SacConfig",
    "ScenarioError",
    "ScenarioResult",
    "Transition",
    "default_dynamics_fit_config",
    "pendulum_cost",
    "pendulum_observation",
    "pole_tip",
    "real_count",
    "run_dyna_scenario",
    "run_model_episode",
    "run_model_episodes",
    "run_real_episode",
    "sac_update",
    "trials_to_threshold",
]
