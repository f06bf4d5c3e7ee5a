"""Command-line entry point: ``physadjust-bench {forrester,pendulum} [options]``.

Exit codes: 0 all cells succeeded, 1 some cells failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

import yaml

from .config import (
    ConfigError,
    ExperimentConfig,
    from_plain,
    merge,
    quick_overrides,
    to_plain,
    with_experiment_defaults,
)
from .outputs import emit_outputs
from .runner import run_forrester, run_pendulum

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="physadjust-bench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, list_flag, help_text in (
        ("forrester", "--models", "Forrester fitting comparison"),
        ("pendulum", "--scenarios", "pendulum Dyna scenarios"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="YAML file; command-line flags override its keys")
        p.add_argument("--seed", type=int, help="root seed")
        p.add_argument(list_flag, dest="models", help="comma-separated list")
        p.add_argument("--reps", type=int, help="number of seeds / repetitions")
        p.add_argument("--out", default=f"results/{name}", help="output directory")
        p.add_argument("--quick", action="store_true", help="reduced seeds and trials")
        p.add_argument("--workers", type=int, help="worker processes")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_config(args) -> ExperimentConfig:
    """File keys, then --quick, then explicit flags, in increasing precedence."""
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config}: top level must be a mapping")
        if data.get("experiment", args.experiment) != args.experiment:
            raise ConfigError(f"{args.config} is a {data['experiment']!r} config, not {args.experiment!r}")
    data = with_experiment_defaults(merge(data, {"experiment": args.experiment}))
    if args.quick:
        data = merge(data, quick_overrides(args.experiment))
    if args.seed is not None:
        data["root_seed"] = args.seed
    if args.models:
        data["models"] = [m.strip() for m in args.models.split(",") if m.strip()]
    if args.reps is not None:
        data["repetitions"] = args.reps
        data.pop("seeds", None)
    if args.workers is not None:
        data["workers"] = args.workers
    return from_plain(ExperimentConfig, data)


def run(config: ExperimentConfig, out_dir, started: float | None = None):
    if config.experiment == "forrester":
        table, extras = run_forrester(config)
    else:
        table, extras = run_pendulum(config)
    paths = emit_outputs(table, extras, out_dir, config, started)
    return table, paths


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.time()
    try:
        config = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    table, paths = run(config, args.out, started)
    for (exp, model, stat, metric, value) in table.aggregates():
        if stat == "mean":
            print(f"{model:>14s} {metric:>20s} mean {value:.4g}")
    for _, model, seed, err in table.failures:
        print(f"FAILED {model} seed {seed}: {err}", file=sys.stderr)
    print(f"wrote {len(paths)} files to {args.out}")
    return EXIT_OK if table.ok else EXIT_PARTIAL


__all__ = ["build_parser", "main", "resolve_config", "run", "to_plain"]


if __name__ == "__main__":
    sys.exit(main())
