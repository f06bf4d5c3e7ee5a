"""Experiment configuration: nested dataclasses read from and written to YAML."""

from __future__ import annotations

import dataclasses
import typing
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ..control import DynaConfig, EpisodeSpec, SacConfig
from ..numerics import OptimizerConfig
from ..surrogates import FitConfig, ParamBounds
from ..surrogates.base import InvalidConfigError

FORRESTER_MODELS = ("crude-only", "zero-mean-gp", "phy-mean-gp", "gp-bias", "gp-scale", "ar1", "cka", "rra")
PENDULUM_SCENARIOS = ("MF", "Dyna-Phy", "Dyna-GP", "Dyna-CKA", "Dyna-RRA")


class ConfigError(InvalidConfigError):
    pass


@dataclass(frozen=True)
class ForresterProtocol:
    n_obs: int = 8
    grid_size: int = 40
    grid_range: tuple = (-0.6, 1.0)
    obs_range: tuple = (0.0, 1.0)
    ar1_n_low: int = 40
    #: seed whose fits are written to the plot-data file
    plot_seed_index: int = 0


@dataclass(frozen=True)
class PendulumProtocol:
    trials: int = 50
    model_trials_per_real: int = 20
    model_based_cutoff: int = 25
    clear_model_buffer_after_cutoff: bool = True
    threshold: float = 0.5
    warm_start: bool = True
    episode: EpisodeSpec = field(default_factory=EpisodeSpec)
    sac: SacConfig = field(default_factory=SacConfig)
    dynamics_fit: FitConfig = field(default_factory=lambda: DynaConfig().fit)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "forrester"
    #: model kinds (forrester) or scenario names (pendulum); empty means all
    models: tuple = ()
    root_seed: int = 0
    repetitions: int = 100
    #: explicit seeds override root_seed + range(repetitions) for forrester
    seeds: tuple | None = None
    fit: FitConfig = field(default_factory=FitConfig)
    forrester: ForresterProtocol = field(default_factory=ForresterProtocol)
    pendulum: PendulumProtocol = field(default_factory=PendulumProtocol)
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in ("forrester", "pendulum"):
            raise ConfigError(f"experiment must be 'forrester' or 'pendulum', got {self.experiment!r}")
        allowed = FORRESTER_MODELS if self.experiment == "forrester" else PENDULUM_SCENARIOS
        bad = [m for m in self.models if m not in allowed]
        if bad:
            raise ConfigError(f"unknown {'models' if self.experiment == 'forrester' else 'scenarios'} "
                              f"{bad}; choose from {', '.join(allowed)}")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    @property
    def model_list(self) -> tuple:
        if self.models:
            return tuple(self.models)
        return FORRESTER_MODELS if self.experiment == "forrester" else PENDULUM_SCENARIOS

    @property
    def seed_list(self) -> tuple:
        if self.seeds is not None:
            return tuple(int(s) for s in self.seeds)
        return tuple(self.root_seed + i for i in range(self.repetitions))

    def dyna_config(self) -> DynaConfig:
        p = self.pendulum
        return DynaConfig(
            trials=p.trials,
            model_trials_per_real=p.model_trials_per_real,
            model_based_cutoff=p.model_based_cutoff,
            clear_model_buffer_after_cutoff=p.clear_model_buffer_after_cutoff,
            episode=p.episode,
            sac=p.sac,
            fit=p.dynamics_fit,
            warm_start=p.warm_start,
        )


# -- (de)serialization -------------------------------------------------------------


def to_plain(obj):
    """Recursively convert dataclasses, tuples and numpy scalars to YAML-safe types."""
    if dataclasses.is_dataclass(obj):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _convert(value, default, hint, path):
    if dataclasses.is_dataclass(default) or (isinstance(hint, type) and dataclasses.is_dataclass(hint)):
        cls = type(default) if dataclasses.is_dataclass(default) else hint
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected a mapping")
        return from_plain(cls, value, path)
    if isinstance(default, tuple) or (value is not None and isinstance(value, list)):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{path}: expected a list")
        return tuple(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true or false")
        return value
    if isinstance(default, float) and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value


def from_plain(cls, data: dict, path: str = ""):
    """Build dataclass ``cls`` from a nested mapping, rejecting unknown keys."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        where = f" under {path}" if path else ""
        raise ConfigError(f"unknown config key(s){where}: {', '.join(unknown)}")
    hints = typing.get_type_hints(cls)
    defaults = cls()
    kwargs = {}
    for name, value in data.items():
        sub = f"{path}.{name}" if path else name
        kwargs[name] = _convert(value, getattr(defaults, name), hints.get(name), sub)
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path or 'config'}: {exc}") from exc


def dump_config(config: ExperimentConfig) -> str:
    return yaml.safe_dump(to_plain(config), sort_keys=False, default_flow_style=None)


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from exc
    return from_plain(ExperimentConfig, with_experiment_defaults(data or {}))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def with_experiment_defaults(data: dict) -> dict:
    """Pendulum runs default to 10 repetitions rather than the Forrester 100."""
    if isinstance(data, dict) and data.get("experiment") == "pendulum" and "seeds" not in data:
        return {"repetitions": 10} | data
    return data


def quick_overrides(experiment: str) -> dict:
    """Reduced sizes for smoke runs."""
    if experiment == "forrester":
        return {"repetitions": 10}
    return {"repetitions": 5, "pendulum": {"trials": 30}}


def merge(base: dict, overrides: dict) -> dict:
    out = dict(base)
    for k, v in overrides.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge(out[k], v)
        else:
            out[k] = v
    return out


__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "FORRESTER_MODELS",
    "ForresterProtocol",
    "OptimizerConfig",
    "PENDULUM_SCENARIOS",
    "ParamBounds",
    "PendulumProtocol",
    "dump_config",
    "from_plain",
    "load_config",
    "merge",
    "parse_config",
    "quick_overrides",
    "to_plain",
    "with_experiment_defaults",
]
