"""Command-line entry point.

Subcommands:
  fig1   sample trajectory bundles from both models, write fig1.csv + fig1.png
  fig2   paired prediction-error comparison, write fig2.csv, summary.txt, fig2.png
  check  run the randomized self-checks and report PASS/FAIL per check

Exit codes: 0 on success, 2 for configuration problems (unreadable or
malformed config file, invalid field values, bad flag overrides), 3 for
runtime failures (numerical breakdown, failed self-checks, I/O errors while
writing results).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .checks import run_checks
from .errors import BridgeTrackError, ConfigError
from .scenario import ScenarioConfig, default_config, parse_config, run_fig1, run_fig2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bridgetrack",
        description="Destination-aware trajectory simulation and prediction experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_flags(p):
        p.add_argument("--config", help="path to a config file (defaults apply if omitted)")
        p.add_argument("--seed", type=int, help="override the base RNG seed")
        p.add_argument("--runs", type=int, help="override the number of Monte-Carlo runs")
        p.add_argument("--out", help="override the output directory")
        p.add_argument(
            "--workers", type=int, default=1, help="worker processes (default 1, serial)"
        )

    p_fig1 = sub.add_parser("fig1", help="sample trajectory bundles from both models")
    add_run_flags(p_fig1)
    p_fig2 = sub.add_parser("fig2", help="compare prediction error against the plain model")
    add_run_flags(p_fig2)
    p_check = sub.add_parser("check", help="run the randomized self-checks")
    p_check.add_argument("--seed", type=int, default=0, help="seed for the check models")
    return parser


def _load_config(args) -> ScenarioConfig:
    config = parse_config(args.config) if args.config else default_config()
    if args.seed is not None:
        config.seed = args.seed
    if args.runs is not None:
        config.runs = args.runs
    if args.out is not None:
        config.out_dir = args.out
    config.validate()
    return config


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "check":
            results = run_checks(args.seed)
            for name, ok, detail in results:
                print(f"{'PASS' if ok else 'FAIL'}  {name} ({detail})")
            if not all(ok for _, ok, _ in results):
                print("self-checks failed", file=sys.stderr)
                return 3
            return 0
        config = _load_config(args)
        if args.command == "fig1":
            _, paths = run_fig1(config, workers=args.workers)
            for label, path in paths.items():
                print(f"wrote {label}: {path}")
        else:
            result, paths = run_fig2(config, workers=args.workers)
            for label, path in paths.items():
                print(f"wrote {label}: {path}")
            print(
                "terminal error ratio (plain / destination-coupled): "
                f"{result.ratio:.2f}"
            )
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (BridgeTrackError, np.linalg.LinAlgError, FloatingPointError, OSError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
