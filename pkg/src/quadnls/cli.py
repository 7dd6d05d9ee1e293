"""Command-line entry point.

    quadnls <experiment> [--config PATH] [--seed INT] [--out DIR]

The subcommand names the experiment (``probe-bilinear``, ``wave-check``
and ``existence-scaling`` use dashes). Without ``--config`` the
experiment runs with its defaults. Exit codes: 0 success, 1 validation
error, 2 runtime failure, 3 blow-up detected.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .config import EXPERIMENTS, ConfigError, config_from_dict
from .experiments import EXIT_RUNTIME, EXIT_VALIDATION, run_experiment

SUBCOMMANDS = {name.replace("_", "-"): name for name in EXPERIMENTS}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadnls",
                                     description="Experiments for the coupled quadratic Schrodinger system.")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in SUBCOMMANDS:
        p = sub.add_parser(cmd, help=f"run the {cmd} experiment")
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int, help="override the configuration seed")
        p.add_argument("--out", help="override the output directory")
    return parser


def _load(path: Optional[str], experiment: str):
    doc = {"experiment": experiment}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError("", f"cannot read {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"malformed JSON in {path}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("", "configuration must be a JSON object")
        doc.setdefault("experiment", experiment)
    cfg = config_from_dict(doc)
    if cfg.experiment != experiment:
        raise ConfigError("experiment", f"config is for {cfg.experiment!r}, not {experiment!r}")
    return cfg


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    experiment = SUBCOMMANDS[args.command]
    try:
        cfg = _load(args.config, experiment)
        if args.seed is not None and args.seed < 0:
            raise ConfigError("seed", "must be nonnegative")
        cfg = cfg.with_overrides(seed=args.seed, output_dir=args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        result = run_experiment(cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if result.error:
        print(f"error: {result.error}", file=sys.stderr)
    print(json.dumps({"status": result.status, "exit_code": result.exit_code,
                      "out": result.out_dir, "files": [f["path"] for f in result.files]},
                     sort_keys=True))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
