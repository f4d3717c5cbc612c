"""Command-line entry point: ``vesselfem {converge,solve,stats,tree,homog}``."""
from __future__ import annotations

import argparse
import sys

from .experiments import EXPERIMENTS, ConfigError, load_config, run_experiment


def build_parser():
    ap = argparse.ArgumentParser(prog="vesselfem", description=__doc__)
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", required=True, help="JSON experiment configuration")
    ap.add_argument("--seed", type=int, help="override run.master_seed")
    ap.add_argument("--threads", type=int, help="override run.threads")
    ap.add_argument("--out", help="override output.dir")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if cfg["experiment"] != args.experiment:
            raise ConfigError(
                f"config describes '{cfg['experiment']}' but '{args.experiment}' was requested")
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            cfg["run"]["master_seed"] = args.seed
            if isinstance(cfg["vessels"], dict):
                cfg["vessels"]["seed"] = args.seed
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be >= 1")
            cfg["run"]["threads"] = args.threads
        if args.out is not None:
            cfg["output"]["dir"] = args.out
        paths = run_experiment(cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"vesselfem: error: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
