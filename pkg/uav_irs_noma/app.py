"""
Application Bootstrapper for the UAV-IRS NOMA coverage tool.

This module sets up logging and configuration, dispatches the requested CLI
subcommand and maps the outcome to a process exit code.
"""

import logging
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional, Sequence

import yaml

from .cli.emitters import ResultTable, emit_csv, emit_svg
from .cli.experiments import EXPERIMENTS
from .cli.parser import parse_args
from .config import ConfigManager
from .logic.errors import AcceptanceError, ConfigError, NomaError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_ACCEPTANCE = 4


class Application:
    """
    The command-line application.

    It parses the arguments, sets up session logging, loads the experiment
    configuration, runs the experiment and writes its results.
    """

    def __init__(self, argv: Optional[Sequence[str]] = None, config_dir: Optional[Path] = None):
        """
        Initializes the Application instance.

        Args:
            argv (Optional[Sequence[str]]): Command-line arguments without the program
                                            name. Defaults to `sys.argv[1:]`.
            config_dir (Optional[Path]): User configuration directory. Defaults to
                                         `ConfigManager.default_dir()`.
        """
        self.args = parse_args(argv)
        self.config_dir = config_dir
        self._configure_logging()
        self.logger = logging.getLogger(__name__)

    def _resolve_config_dir(self) -> Path:
        if self.config_dir is None:
            self.config_dir = ConfigManager.default_dir()
        return self.config_dir

    def _configure_logging(self):
        """
        Configures the logging system, including log rotation.

        Logs are stored in a 'logs' subdirectory within the user's configuration
        directory, one file per session; only the 10 most recent are kept. Console
        output goes to stderr so that results on stdout stay clean.
        """
        level = getattr(logging, self.args.log_level)
        fmt = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
        try:
            log_dir = self._resolve_config_dir() / ConfigManager.LOGS_SUBDIR
            log_dir.mkdir(parents=True, exist_ok=True)

            log_files = sorted(log_dir.glob("session-*.log"), key=os.path.getmtime, reverse=True)
            for old_log in log_files[9:]:
                try:
                    old_log.unlink()
                except OSError as e:
                    logging.warning(f"Failed to remove old log file: {old_log}. Error: {e}")

            log_file = log_dir / f"session-{datetime.now():%Y-%m-%d_%H-%M-%S}.log"
            logging.basicConfig(
                level=level,
                format=fmt,
                handlers=[logging.FileHandler(log_file, encoding="utf-8"), logging.StreamHandler(sys.stderr)],
                force=True,
            )
        except OSError as e:
            logging.basicConfig(level=level, format=fmt, handlers=[logging.StreamHandler(sys.stderr)], force=True)
            logging.critical(f"Failed to configure file-based logging: {e}")

    def _load_config(self):
        manager = ConfigManager(self._resolve_config_dir())
        cfg = manager.load(self.args.config)
        if self.args.command == "validate-config":
            return cfg
        return cfg.with_overrides(
            trials=self.args.trials,
            seed=self.args.seed,
            workers=self.args.workers,
            mode=self.args.mode,
            weight_mode=self.args.weight_mode,
            out_csv=str(self.args.out_csv) if self.args.out_csv else None,
            out_svg=str(self.args.out_svg) if self.args.out_svg else None,
        )

    def _write(self, table: ResultTable, cfg) -> None:
        if cfg.outputs.csv:
            emit_csv(table, cfg.outputs.csv)
        else:
            sys.stdout.write(table.to_csv_text())
        if cfg.outputs.svg:
            emit_svg(table, cfg.outputs.svg)
        if self.args.command == "optimize":
            bound = table.metadata["elevation_bound_deg"]
            for size, optimum in table.metadata["optima"].items():
                sys.stdout.write(
                    f"R={size}: theta*={optimum['theta_deg']:.2f} deg, c_f={optimum['c_f']:.6f}, bound={bound:.2f} deg\n"
                )

    def run(self) -> int:
        """
        Runs the selected subcommand.

        Returns:
            int: 0 on success, 2 on configuration errors, 3 on runtime errors and 4 when
                 analytic and Monte Carlo results disagree beyond the tolerance.
        """
        command = self.args.command
        self.logger.info(f"Running '{command}'")
        try:
            cfg = self._load_config()
            if command == "validate-config":
                sys.stdout.write(yaml.safe_dump(cfg.to_dict(), sort_keys=False))
                self.logger.info("Configuration is valid.")
                return EXIT_OK
            table = EXPERIMENTS[command](cfg)
            self._write(table, cfg)
            if table.failures:
                raise AcceptanceError(f"{len(table.failures)} point(s) outside the tolerance: " + "; ".join(table.failures))
        except ConfigError as e:
            self.logger.error(f"Configuration error: {e}")
            return EXIT_CONFIG
        except AcceptanceError as e:
            self.logger.error(f"Acceptance check failed for '{command}': {e}")
            return EXIT_ACCEPTANCE
        except (NomaError, OSError) as e:
            self.logger.error(f"'{command}' failed: {e}")
            return EXIT_RUNTIME
        except Exception as e:
            self.logger.critical(f"'{command}' crashed with an unhandled exception: {e}", exc_info=True)
            return EXIT_RUNTIME

        self.logger.info(f"'{command}' finished.")
        return EXIT_OK
