"""Experiment runners producing keyed result rows and plot data."""

from __future__ import annotations

import dataclasses
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..control import SCENARIOS, run_dyna_scenario, trials_to_threshold
from ..physics import forrester_crude, forrester_physics, forrester_true
from ..surrogates import make_model
from .config import ExperimentConfig

logger = logging.getLogger(__name__)


@dataclass
class ResultTable:
    """Rows of (experiment, model, seed, metric, value); failures carry an error string."""

    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def add(self, experiment, model, seed, metric, value):
        self.rows.append((experiment, model, seed, metric, value))

    def fail(self, experiment, model, seed, message: str):
        self.failures.append((experiment, model, seed, message))

    def sorted_rows(self) -> list:
        return sorted(self.rows, key=lambda r: (r[0], r[1], r[2], r[3]))

    def values(self, model: str, metric: str) -> np.ndarray:
        return np.array([r[4] for r in self.rows if r[1] == model and r[3] == metric], dtype=float)

    def aggregates(self) -> list:
        """(experiment, model, stat, metric, value) with population std."""
        keys = sorted({(r[0], r[1], r[3]) for r in self.rows})
        out = []
        for exp, model, metric in keys:
            v = np.array([r[4] for r in self.rows if (r[0], r[1], r[3]) == (exp, model, metric)], dtype=float)
            out.append((exp, model, "mean", metric, float(np.mean(v))))
            out.append((exp, model, "std", metric, float(np.std(v))))
        return out

    @property
    def ok(self) -> bool:
        return not self.failures


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- Forrester ------------------------------------------------------------------------


def forrester_grid(config: ExperimentConfig) -> np.ndarray:
    p = config.forrester
    return np.linspace(p.grid_range[0], p.grid_range[1], p.grid_size)


def forrester_observations(config: ExperimentConfig, seed: int):
    p = config.forrester
    rng = np.random.default_rng(seed)
    x = rng.uniform(p.obs_range[0], p.obs_range[1], p.n_obs)
    return x, forrester_true(x)


def _forrester_fit_config(config: ExperimentConfig, seed: int):
    p = config.forrester
    fit = config.fit
    return dataclasses.replace(
        fit,
        seed=seed,
        optimizer=dataclasses.replace(fit.optimizer, seed=seed),
        ar1_n_low=p.ar1_n_low,
        ar1_low_box=(np.array([p.grid_range[0]]), np.array([p.grid_range[1]])),
    )


def fit_forrester_model(config: ExperimentConfig, model: str, seed: int):
    """Predictive mean and std on the evaluation grid for one model and seed."""
    grid = forrester_grid(config)
    if model == "crude-only":
        return forrester_crude(grid), np.zeros_like(grid)
    x, y = forrester_observations(config, seed)
    physics = forrester_physics()
    surrogate = make_model(model, physics.component(0), _forrester_fit_config(config, seed))
    surrogate.fit(x[:, None], y)
    pd = surrogate.predict(grid[:, None])
    return pd.mean, pd.std


def _forrester_cell(args):
    config, model, seed = args
    try:
        mean, std = fit_forrester_model(config, model, seed)
    except Exception as exc:  # recorded per cell, the run continues
        return model, seed, None, None, f"{type(exc).__name__}: {exc}"
    return model, seed, mean, std, None


def run_forrester(config: ExperimentConfig):
    """RMSE of each model's predictive mean against f_true on the grid, per seed.

    Returns the result table and plot data for the configured example seed.
    """
    grid = forrester_grid(config)
    f_true = forrester_true(grid)
    seeds = config.seed_list
    cells = [(config, m, s) for s in seeds for m in config.model_list]
    table = ResultTable()
    plot_seed = seeds[min(config.forrester.plot_seed_index, len(seeds) - 1)]
    plot = {"x": grid, "f_true": f_true, "f_p": forrester_crude(grid)}
    for model, seed, mean, std, err in _map(_forrester_cell, cells, config.workers):
        if err is not None:
            table.fail("forrester", model, seed, err)
            continue
        table.add("forrester", model, seed, "rmse", float(np.sqrt(np.mean((mean - f_true) ** 2))))
        if seed == plot_seed and model != "crude-only":
            plot[f"{model}_mean"] = mean
            plot[f"{model}_std"] = std
    x_obs, y_obs = forrester_observations(config, plot_seed)
    return table, {"fit": plot, "observations": {"x": x_obs, "y": y_obs}, "plot_seed": plot_seed}


# -- pendulum -------------------------------------------------------------------------


def derived_seed(root_seed: int, scenario_index: int, rep: int) -> int:
    """Seed for (scenario, repetition), hashed from the root seed."""
    return int(np.random.SeedSequence([root_seed, scenario_index, rep]).generate_state(1)[0])


def _pendulum_cell(args):
    config, scenario, rep = args
    idx = list(SCENARIOS).index(scenario)
    seed = derived_seed(config.root_seed, idx, rep)
    t0 = time.perf_counter()
    try:
        res = run_dyna_scenario(scenario, config.dyna_config(), seed=seed, log_fn=lambda rec: None)
    except Exception as exc:
        return scenario, rep, seed, None, f"{type(exc).__name__}: {exc}", time.perf_counter() - t0
    return scenario, rep, seed, res, None, time.perf_counter() - t0


def run_pendulum(config: ExperimentConfig):
    """Learning curves for every scenario × repetition.

    Metrics per run: ``trials_to_threshold`` (first trial under the cost
    threshold, or trials + 1 when never reached), ``reached`` (0/1),
    ``final_cost`` (mean over the last five trials) and ``refit_count``.
    """
    p = config.pendulum
    cells = [(config, sc, rep) for sc in config.model_list for rep in range(config.repetitions)]
    table = ResultTable()
    curves, logs, timings = [], [], []
    for scenario, rep, seed, res, err, wall in _map(_pendulum_cell, cells, config.workers):
        timings.append({"scenario": scenario, "rep": rep, "seconds": wall})
        if err is not None:
            table.fail("pendulum", scenario, rep, err)
            continue
        hit = trials_to_threshold(res.curve, p.threshold)
        table.add("pendulum", scenario, rep, "trials_to_threshold", float(hit if hit is not None else p.trials + 1))
        table.add("pendulum", scenario, rep, "reached", float(hit is not None))
        table.add("pendulum", scenario, rep, "final_cost", float(np.mean(res.curve[-5:])))
        table.add("pendulum", scenario, rep, "refit_count", float(res.refit_count))
        curves.append({"scenario": scenario, "rep": rep, "seed": seed, "curve": list(res.curve)})
        logs.extend({k: v for k, v in rec.items() if k != "wall_time"} | {"rep": rep} for rec in res.logs)
    curves.sort(key=lambda c: (c["scenario"], c["rep"]))
    return table, {"curves": curves, "logs": logs, "timings": timings}
