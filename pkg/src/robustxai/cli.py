"""Command-line entry point.

    eval worst  --config cfg.json [--out DIR] [--jobs K]
    eval prob   --config cfg.json ...
    eval oracle --config cfg.json ...
    eval rank   --config cfg.json ...

Exit codes: 0 success, 1 invalid configuration, 2 per-seed hard errors.
SAFARI_LOG sets the log level (DEBUG/INFO/WARNING/ERROR).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import load_config
from .errors import ConfigError
from .runner import execute_config, rank_explainers

_EXPECTED_SOLVERS = {"worst": ("ga",), "prob": ("ss",), "oracle": ("smc", "grid")}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eval", description="Robustness evaluation of classifier/explainer pairs")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in [("worst", "worst-case search (GA solver)"),
                      ("prob", "misinterpretation probability (subset simulation)"),
                      ("oracle", "brute-force calibration (plain Monte Carlo or grid)"),
                      ("rank", "rank explainers sharing one model")]:
        cmd = sub.add_parser(name, help=doc)
        cmd.add_argument("--config", required=True, help="path to the JSON run configuration")
        cmd.add_argument("--out", default=None, help="output directory (overrides the config)")
        cmd.add_argument("--jobs", type=int, default=1, help="parallel seeds (in-process targets)")
        cmd.add_argument("--allow-nondeterministic", action="store_true",
                         help="accept adapters that declare deterministic=false")
    return parser


def main(argv=None) -> int:
    level = os.environ.get("SAFARI_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        expected = _EXPECTED_SOLVERS.get(args.command)
        if expected and cfg.solver["kind"] not in expected:
            raise ConfigError("solver.kind",
                              f"subcommand {args.command!r} needs one of {expected}, "
                              f"got {cfg.solver['kind']!r}")
        if args.command == "rank":
            return rank_explainers(cfg, jobs=args.jobs, out_dir=args.out,
                                   allow_nondeterministic=args.allow_nondeterministic)
        return execute_config(cfg, jobs=args.jobs, out_dir=args.out,
                              allow_nondeterministic=args.allow_nondeterministic)
    except ConfigError as exc:
        print(f"config error at {exc.field}: {exc.args[0].split(': ', 1)[-1]}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
