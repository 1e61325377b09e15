"""Command-line entry point: ``mimorelay <experiment> [options]`` and ``mimorelay list``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .. import __version__
from ..errors import ConfigError, InvalidParameterError
from .config import parse_config
from .experiments import DESCRIPTIONS, REGISTRY, run_experiment
from .io import emit

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mimorelay", description="Hybrid-ZF two-way relay experiments.")
    parser.add_argument("experiment", help="experiment name, or 'list' to enumerate them")
    parser.add_argument("--config", help="flat TOML config file")
    parser.add_argument("--seed", type=int, help="master seed (overrides config)")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials per point (overrides config)")
    parser.add_argument("--out", help="output path; stdout when omitted")
    parser.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    parser.add_argument("--workers", type=int, help="worker processes for Monte Carlo trials")
    parser.add_argument("--full", action="store_true", help="use the wide sweep grids")
    parser.add_argument("--version", action="version", version=f"mimorelay {__version__}")
    return parser


def load_config(args):
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror}") from exc
        cfg = parse_config(text)
        if cfg.experiment != args.experiment:
            raise ConfigError(f"config is for experiment {cfg.experiment!r}, "
                              f"but {args.experiment!r} was requested")
    else:
        cfg = parse_config(f'experiment = "{args.experiment}"')
    overrides = {k: getattr(args, k) for k in ("seed", "trials", "out", "format", "workers")
                 if getattr(args, k) is not None}
    if args.full:
        overrides["full"] = True
    return replace(cfg, **overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.experiment == "list":
        for name in REGISTRY:
            print(f"{name:22s}{DESCRIPTIONS[name]}")
        return EXIT_OK
    if args.experiment not in REGISTRY:
        print(f"mimorelay: unknown experiment {args.experiment!r}; run 'mimorelay list'", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"mimorelay: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        rows = run_experiment(cfg)
    except (ConfigError, InvalidParameterError) as exc:
        print(f"mimorelay: invalid parameters for {cfg.experiment}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # surfaced with context, never a traceback dump
        print(f"mimorelay: {cfg.experiment} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    metadata = {"experiment": cfg.experiment, "seed": cfg.seed, "trials": cfg.trials, "full": cfg.full,
                "version": __version__, "params": cfg.params}
    try:
        emit(rows, cfg.format, cfg.out, metadata)
    except OSError as exc:
        print(f"mimorelay: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
