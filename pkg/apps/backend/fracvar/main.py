"""
Discrete fractional calculus of variations: command-line entry point.

Run from the repository root:

    python -m apps.backend.fracvar.main solve --config configs/problems/cubic.cfg --output out/cubic.csv
    python -m apps.backend.fracvar.main check --seed 2024
    python -m apps.backend.fracvar.main sweep --example ex1 --h 1/10,1/20,1/30 --output out/ex1.csv

Exit status: 0 success, 1 check violation, 2 no extremal found, 64 usage/config error,
70 unexpected failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from apps.backend.fracvar.lib.cmd_check import cmd_check
from apps.backend.fracvar.lib.cmd_solve import cmd_solve
from apps.backend.fracvar.lib.cmd_sweep import cmd_sweep
from apps.backend.fracvar.lib.exit_codes import EXIT_INTERNAL, EXIT_USAGE
from apps.utils.problem_config import load_settings, parse_number
from logs.logging_setup import get_logger, set_levels

LOG = get_logger(
    "fracvar_cli",
    file_name="fracvar_cli.log",
    max_bytes=5 * 1024 * 1024,
    backup_count=5,
    level=logging.INFO,
    also_console=True
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _number_list(text: str) -> list[float]:
    try:
        return [parse_number(part) for part in text.split(",") if part.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracvar", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--settings", default=None, help="settings YAML (default configs/fracvar/settings.yml)")
    parser.add_argument("--verbose", action="store_true", help="echo INFO logs to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_solve = sub.add_parser("solve", help="find and screen all extremals of a problem file")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--output", required=True)
    p_solve.add_argument("--seed", type=int)
    p_solve.add_argument("--starts", type=int)
    p_solve.add_argument("--workers", type=int)

    p_check = sub.add_parser("check", help="randomized identity and oracle self-checks")
    p_check.add_argument("--seed", type=int)
    p_check.add_argument("--instances", type=int)

    p_sweep = sub.add_parser("sweep", help="convergence sweep of a registered example")
    p_sweep.add_argument("--example", required=True)
    p_sweep.add_argument("--output", required=True)
    group = p_sweep.add_mutually_exclusive_group()
    group.add_argument("--h", type=_number_list, dest="h_values")
    group.add_argument("--alpha", type=_number_list, dest="alpha_values")
    p_sweep.add_argument("--seed", type=int)
    p_sweep.add_argument("--starts", type=int)
    p_sweep.add_argument("--workers", type=int)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"fracvar: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        settings = load_settings(args.settings)
    except (OSError, ValueError) as e:
        print(f"fracvar: cannot load settings: {e}", file=sys.stderr)
        return EXIT_USAGE

    log_cfg = settings.get("logging") or {}
    file_level = logging.getLevelName(str(log_cfg.get("level", "INFO")).upper())
    console_level = logging.INFO if args.verbose else logging.getLevelName(
        str(log_cfg.get("console_level", "WARNING")).upper()
    )
    set_levels(file_level, console_level)

    try:
        if args.command == "solve":
            return cmd_solve(args.config, args.output, seed=args.seed, starts=args.starts,
                             workers=args.workers, settings=settings)
        if args.command == "check":
            return cmd_check(settings, seed=args.seed, instances=args.instances)
        return cmd_sweep(args.example, args.output, h_values=args.h_values, alpha_values=args.alpha_values,
                         seed=args.seed, starts=args.starts, workers=args.workers, settings=settings)
    except Exception as e:
        LOG.exception(f"[main] {args.command} aborted: {e}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
