"""Command-line parser: one subcommand per experiment plus `validate-config`."""
from __future__ import annotations

import argparse
from pathlib import Path
from typing import Optional, Sequence

SUBCOMMANDS = ("power-sweep", "elevation-sweep", "assoc-stats", "optimize", "validate-config")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uav_irs_noma",
        description="Coverage of UAV-IRS assisted NOMA downlinks: closed forms and Monte Carlo checks. "
        "Angles in configuration files are given in degrees.",
    )
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", type=Path, help="YAML experiment file merged over the defaults")
        if name == "validate-config":
            continue
        cmd.add_argument("--trials", type=_positive_int, help="Monte Carlo trials per point")
        cmd.add_argument("--seed", type=_seed, help="master seed")
        cmd.add_argument("--mode", choices=["analytic", "mc", "both"])
        cmd.add_argument("--weight-mode", choices=["binomial", "paper-literal"])
        cmd.add_argument("--workers", type=_positive_int, help="worker processes")
        cmd.add_argument("--out-csv", type=Path, help="CSV output path")
        cmd.add_argument("--out-svg", type=Path, help="SVG chart output path")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)
