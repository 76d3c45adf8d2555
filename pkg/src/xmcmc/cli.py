"""Command line front end.

Usage: sim <config.json> [--out DIR] [--threads T] [--seed S]
            [--no-figures] [--summary]

Exit codes: 0 on success, 2 for configuration or usage errors, 3 when a
valid configuration cannot run (for example an exhaustive-search grid
above its state cap).
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .runner import ExperimentError, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sim", description="Run a soft-output MIMO detection experiment."
    )
    parser.add_argument("config", help="path to a JSON experiment configuration")
    parser.add_argument("--out", default=None, help="output directory (default: from config)")
    parser.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    parser.add_argument(
        "--seed", type=int, default=None, help="override the config master seed"
    )
    parser.add_argument(
        "--no-figures", action="store_true", help="skip figure rendering"
    )
    parser.add_argument(
        "--summary", action="store_true", help="print a human-readable result table"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return int(exc.code) if exc.code else 0
    if args.threads < 1:
        print("sim: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
    except FileNotFoundError:
        print(f"sim: config file not found: {args.config}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"sim: invalid config: {exc}", file=sys.stderr)
        return 2
    try:
        result = run_experiment(
            cfg,
            out_dir=args.out,
            threads=args.threads,
            master_seed=args.seed,
            figures=not args.no_figures,
            summary=args.summary,
        )
    except ExperimentError as exc:
        print(f"sim: cannot run experiment: {exc}", file=sys.stderr)
        return 3
    for path in result["csv"] + result["figures"]:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
