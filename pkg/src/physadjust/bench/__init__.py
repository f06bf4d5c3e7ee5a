from .config import (
    FORRESTER_MODELS,
    PENDULUM_SCENARIOS,
    ConfigError,
    ExperimentConfig,
    ForresterProtocol,
    PendulumProtocol,
    dump_config,
    load_config,
    parse_config,
)
from .outputs import CSV_HEADER, emit_outputs
from .runner import ResultTable, derived_seed, run_forrester, run_pendulum

__all__ = [
    "CSV_HEADER",
    "ConfigError",
    "ExperimentConfig",
    "FORRESTER_MODELS",
    "ForresterProtocol",
    "PENDULUM_SCENARIOS",
    "PendulumProtocol",
    "ResultTable",
    "derived_seed",
    "dump_config",
    "emit_outputs",
    "load_config",
    "parse_config",
    "run_forrester",
    "run_pendulum",
]
