"""Command-line surface: argument parsing, experiment runners and result emitters."""
from .emitters import ResultTable, emit_csv, emit_svg
from .experiments import EXPERIMENTS, run_assoc_stats, run_elevation_sweep, run_optimize, run_power_ratio_sweep
from .parser import build_parser, parse_args

__all__ = [
    "EXPERIMENTS",
    "ResultTable",
    "build_parser",
    "emit_csv",
    "emit_svg",
    "parse_args",
    "run_assoc_stats",
    "run_elevation_sweep",
    "run_optimize",
    "run_power_ratio_sweep",
]
