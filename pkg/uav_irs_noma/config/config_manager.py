"""
This module provides the `ConfigManager` class, which loads experiment configurations.
The bundled `defaults.yaml` (the reference network) is merged with an optional user
file, either given explicitly or found as `experiment.yaml` in the user configuration
directory, and validated into an `ExperimentConfig`. Validation errors are reported
with the YAML line of the offending key when it is known.
"""
from __future__ import annotations

import os
import copy
import yaml
import logging
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Optional

from appdirs import user_config_dir

from ..logic.errors import ConfigError
from ..logic.experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)

# Overrides the per-user configuration directory.
ENV_CONFIG_DIR = "UAV_IRS_NOMA_CONFIG_DIR"

# Fallback used when the bundled `defaults.yaml` cannot be read.
DEFAULTS_YAML = """
network:
  tx_power_watts: 30.0
  bs_density: 1.0e-5
  uav_density: 1.0e-4
  user_density: 1.0e-4
  pathloss_exponent: 3.0
  los_enhancement: 2.5
  los_c1: 24.5811
  los_c2: 39.5971
  irs_elements: 8
  sir_threshold: 0.5
elevation:
  kind: deterministic
  theta_deg: 15.0
mode: analytic
weight_mode: binomial
"""


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """
    Returns `base` updated with `override`; nested mappings are merged key by key.
    """
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def key_lines(text: str) -> Dict[str, int]:
    """
    Maps dotted key paths of a YAML document to 1-based line numbers.

    Args:
        text (str): YAML source.

    Returns:
        Dict[str, int]: e.g. {"network.pathloss_exponent": 12}.
    """
    lines: Dict[str, int] = {}

    def walk(node: yaml.Node, prefix: str) -> None:
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
                lines[path] = key_node.start_mark.line + 1
                walk(value_node, path)
        elif isinstance(node, yaml.SequenceNode):
            for index, item in enumerate(node.value):
                path = f"{prefix}[{index}]"
                lines[path] = item.start_mark.line + 1
                walk(item, path)

    root = yaml.compose(text)
    if root is not None:
        walk(root, "")
    return lines


class ConfigManager:
    """
    Loads, validates and saves experiment configurations.
    """

    CONFIG_FILE_NAME = "experiment.yaml"
    LOGS_SUBDIR = "logs"

    def __init__(self, config_dir: Optional[Path] = None):
        """
        Initializes the ConfigManager.

        Args:
            config_dir (Optional[Path]): User configuration directory. Defaults to
                                         `ConfigManager.default_dir()`.
        """
        self.config_dir: Path = config_dir if config_dir is not None else self.default_dir()
        self.config_file: Path = self.config_dir / self.CONFIG_FILE_NAME
        self.defaults_path = resources.files(__package__) / "defaults.yaml"
        logger.debug(f"ConfigManager initialized. Config directory: {self.config_dir}")

    @staticmethod
    def default_dir() -> Path:
        """
        The user configuration directory, created if missing.

        `UAV_IRS_NOMA_CONFIG_DIR` wins when set; otherwise `appdirs.user_config_dir`
        picks the platform location. Session logs and the optional
        `experiment.yaml` live there.

        Raises:
            OSError: If the directory cannot be created.
        """
        env_dir = os.environ.get(ENV_CONFIG_DIR)
        config_dir = Path(env_dir) if env_dir else Path(user_config_dir("uav_irs_noma"))
        try:
            config_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"Failed to create configuration directory {config_dir}: {e}")
            raise
        logger.debug(f"Using config directory {config_dir} (env override: {bool(env_dir)}).")
        return config_dir

    @property
    def logs_dir(self) -> Path:
        return self.config_dir / self.LOGS_SUBDIR

    def load_defaults(self) -> Dict[str, Any]:
        """
        Reads the bundled defaults, falling back to `DEFAULTS_YAML`.

        Returns:
            Dict[str, Any]: The default configuration as plain data.
        """
        try:
            text = self.defaults_path.read_text(encoding="utf-8")
        except (FileNotFoundError, OSError) as e:
            logger.warning(f"Bundled defaults not readable ({e}). Using hardcoded defaults.")
            text = DEFAULTS_YAML
        return yaml.safe_load(text) or {}

    def _read_user_file(self, path: Path) -> tuple[Dict[str, Any], Dict[str, int]]:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read configuration file {path}: {e}") from e
        try:
            data = yaml.safe_load(text) or {}
            lines = key_lines(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ConfigError(f"invalid YAML in {path}: {getattr(e, 'problem', e)}", line=line) from e
        if not isinstance(data, dict):
            raise ConfigError(f"configuration root in {path} must be a mapping", line=1)
        logger.info(f"Loaded user config from {path}.")
        return data, lines

    def load(self, path: Optional[Path] = None) -> ExperimentConfig:
        """
        Loads and validates the experiment configuration.

        Args:
            path (Optional[Path]): Explicit configuration file. When None, the user's
                                   `experiment.yaml` is used if it exists, else only the
                                   defaults.

        Returns:
            ExperimentConfig: The merged configuration.

        Raises:
            ConfigError: On unreadable files, YAML syntax errors or invalid values.
        """
        user_data: Dict[str, Any] = {}
        lines: Dict[str, int] = {}
        source = path if path is not None else (self.config_file if self.config_file.is_file() else None)
        if source is not None:
            user_data, lines = self._read_user_file(Path(source))
        merged = deep_merge(self.load_defaults(), user_data)
        try:
            cfg = ExperimentConfig.from_dict(merged)
        except ConfigError as e:
            if e.line is None and e.field:
                line = _line_for(e.field, lines)
                if line is not None:
                    raise ConfigError(e.message, field=e.field, line=line) from None
            raise
        logger.debug("Configuration loaded and validated.")
        return cfg

    def save(self, cfg: ExperimentConfig, path: Optional[Path] = None) -> Path:
        """
        Writes `cfg` as YAML.

        Args:
            cfg (ExperimentConfig): The configuration.
            path (Optional[Path]): Target file. Defaults to the user's `experiment.yaml`.

        Returns:
            Path: The written file.
        """
        target = Path(path) if path is not None else self.config_file
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", encoding="utf-8") as fh:
                yaml.safe_dump(cfg.to_dict(), fh, indent=2, sort_keys=False)
        except OSError as e:
            logger.error(f"Failed to save configuration to {target}: {e}")
            raise OSError(f"{target}: {e}") from e
        logger.info(f"Configuration saved to {target}.")
        return target


def _line_for(field: str, lines: Dict[str, int]) -> Optional[int]:
    """Line of `field` or of its closest ancestor present in the user file."""
    path = field
    while path:
        if path in lines:
            return lines[path]
        cut = max(path.rfind("."), path.rfind("["))
        path = path[:cut] if cut > 0 else ""
    return None
