"""Writing result tables, summaries and plot-data files."""

from __future__ import annotations

import csv
import json
import platform
import time
from pathlib import Path

import numpy as np
import yaml

from .config import ExperimentConfig, dump_config
from .runner import ResultTable

CSV_HEADER = ("experiment", "model", "seed", "metric", "value")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return repr(float(v))


def _write_columns(path: Path, columns: dict):
    names = list(columns)
    n = len(next(iter(columns.values()))) if columns else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for i in range(n):
            w.writerow([_fmt(columns[k][i]) for k in names])


def _summary(table: ResultTable, config: ExperimentConfig) -> dict:
    out = {}
    for exp, model, stat, metric, value in table.aggregates():
        out.setdefault(model, {}).setdefault(metric, {})[stat] = value
    for model in out:
        n = {r[2] for r in table.rows if r[1] == model}
        out[model]["completed_runs"] = len(n)
    if config.experiment == "pendulum":
        for model in out:
            v = table.values(model, "trials_to_threshold")
            out[model]["trials_to_threshold"]["median"] = float(np.median(v)) if v.size else None
    out["failures"] = [
        {"model": m, "seed": s, "error": e} for _, m, s, e in sorted(table.failures, key=lambda f: (f[1], f[2]))
    ]
    return out


def emit_outputs(table: ResultTable, extras: dict, output_dir, config: ExperimentConfig,
                 started: float | None = None) -> dict:
    """Write every output file for one run; returns a name -> path map.

    Everything except ``metadata.json`` is a deterministic function of the
    config, so reruns produce byte-identical files.
    """
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    paths = {}
    exp = config.experiment
    try:
        paths["results"] = out / "results.csv"
        with open(paths["results"], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for row in table.sorted_rows():
                w.writerow([row[0], row[1], row[2], row[3], _fmt(row[4])])
            for _, model, seed, err in sorted(table.failures, key=lambda f: (f[1], f[2])):
                w.writerow([exp, model, seed, "error", err])
            for row in table.aggregates():
                w.writerow([row[0], row[1], row[2], row[3], _fmt(row[4])])

        paths["summary"] = out / "summary.yaml"
        paths["summary"].write_text(yaml.safe_dump(_summary(table, config), sort_keys=True))

        paths["config"] = out / "config.yaml"
        paths["config"].write_text(dump_config(config))

        if exp == "forrester":
            fit = extras["fit"]
            paths["plot_fit"] = out / "forrester_fit.csv"
            _write_columns(paths["plot_fit"], fit)
            paths["plot_obs"] = out / "forrester_observations.csv"
            _write_columns(paths["plot_obs"], extras["observations"])
            models = sorted({r[1] for r in table.rows})
            agg = {(m, s): v for _, m, s, metric, v in table.aggregates() if metric == "rmse"}
            paths["plot_rmse"] = out / "forrester_rmse.csv"
            _write_columns(paths["plot_rmse"], {
                "model": models,
                "rmse_mean": [agg[(m, "mean")] for m in models],
                "rmse_std": [agg[(m, "std")] for m in models],
            })
        else:
            curves = extras["curves"]
            rows = {"scenario": [], "rep": [], "seed": [], "trial": [], "cost": []}
            for c in curves:
                for t, cost in enumerate(c["curve"], start=1):
                    rows["scenario"].append(c["scenario"])
                    rows["rep"].append(str(c["rep"]))
                    rows["seed"].append(str(c["seed"]))
                    rows["trial"].append(str(t))
                    rows["cost"].append(cost)
            paths["plot_curves"] = out / "pendulum_curves.csv"
            _write_columns(paths["plot_curves"], rows)
            summary = {"scenario": [], "trial": [], "cost_mean": [], "cost_std": []}
            for sc in sorted({c["scenario"] for c in curves}):
                arr = np.array([c["curve"] for c in curves if c["scenario"] == sc])
                for t in range(arr.shape[1]):
                    summary["scenario"].append(sc)
                    summary["trial"].append(str(t + 1))
                    summary["cost_mean"].append(float(arr[:, t].mean()))
                    summary["cost_std"].append(float(arr[:, t].std()))
            paths["plot_summary"] = out / "pendulum_curve_summary.csv"
            _write_columns(paths["plot_summary"], summary)
            paths["log"] = out / "trial_log.jsonl"
            with open(paths["log"], "w") as fh:
                for rec in sorted(extras["logs"], key=lambda r: (r["scenario"], r["rep"], r["trial"])):
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")

        paths["metadata"] = out / "metadata.json"
        meta = {
            "written_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "elapsed_seconds": None if started is None else time.time() - started,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "timings": extras.get("timings", []),
        }
        paths["metadata"].write_text(json.dumps(meta, indent=2, sort_keys=True))
    except OSError as exc:
        raise OSError(f"failed writing outputs under {out}: {exc}") from exc
    return paths
