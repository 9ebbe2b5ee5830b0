"""
This module defines `ExperimentConfig` and its section dataclasses: the validated,
typed form of the YAML experiment file. Angles are kept in degrees here so that a
configuration echoes back exactly; they are converted to radians once, when the
analytic and simulation code asks for an `ElevationModel`.
"""
from __future__ import annotations

import math
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Optional

import numpy as np

from .coverage import WeightMode
from .errors import ConfigError, NomaError
from .montecarlo import SimConfig
from .network_model import ElevationModel, NetworkParams, PowerSplit
from .special_math import QuadratureSpec

logger = logging.getLogger(__name__)

MODES = ("analytic", "mc", "both")


@dataclass(frozen=True)
class ElevationConfig:
    """
    Elevation-angle distribution in degrees.

    Attributes:
        kind (str): "deterministic" or "uniform".
        theta_deg (float): Angle of a deterministic model.
        theta_lo_deg (float): Lower bound of a uniform model.
        theta_hi_deg (float): Upper bound of a uniform model.
    """

    kind: str = "deterministic"
    theta_deg: float = 15.0
    theta_lo_deg: float = 0.0
    theta_hi_deg: float = 0.0

    def __post_init__(self) -> None:
        self.to_model()

    def to_model(self) -> ElevationModel:
        if self.kind == "deterministic":
            return ElevationModel.deterministic(math.radians(self.theta_deg))
        if self.kind == "uniform":
            return ElevationModel.uniform(math.radians(self.theta_lo_deg), math.radians(self.theta_hi_deg))
        raise ConfigError(f"unknown elevation kind {self.kind!r}", field="elevation.kind")


@dataclass(frozen=True)
class PowerSweepConfig:
    """
    P_n/P_f sweep. Explicit `ratio_values` take precedence over the log-spaced range.
    """

    ratio_min: float = 0.1
    ratio_max: float = 10.0
    ratio_points: int = 25
    ratio_values: tuple[float, ...] = ()
    theta_deg: float = 15.0
    irs_elements: tuple[int, ...] = (8, 16)

    def __post_init__(self) -> None:
        if not 0 < self.ratio_min < self.ratio_max:
            raise ConfigError("need 0 < ratio_min < ratio_max", field="power_sweep.ratio_min")
        if self.ratio_points < 2:
            raise ConfigError("need at least 2 points", field="power_sweep.ratio_points")
        if self.ratio_values and (min(self.ratio_values) <= 0):
            raise ConfigError("ratios must be positive", field="power_sweep.ratio_values")
        _check_sorted(self.ratio_values, "power_sweep.ratio_values", allow_empty=True)
        _check_sorted(self.irs_elements, "power_sweep.irs_elements")

    def ratios(self) -> list[float]:
        if self.ratio_values:
            return list(self.ratio_values)
        return [float(r) for r in np.geomspace(self.ratio_min, self.ratio_max, self.ratio_points)]


@dataclass(frozen=True)
class ElevationSweepConfig:
    start_deg: float = 1.0
    stop_deg: float = 56.0
    step_deg: float = 0.5
    irs_elements: tuple[int, ...] = (8, 16, 32)
    split_ratio: float = 2.0

    def __post_init__(self) -> None:
        if not 0 < self.start_deg < self.stop_deg < 90:
            raise ConfigError("need 0 < start_deg < stop_deg < 90", field="elevation_sweep.start_deg")
        if not self.step_deg > 0:
            raise ConfigError("step must be positive", field="elevation_sweep.step_deg")
        if not self.split_ratio > 0:
            raise ConfigError("split ratio must be positive", field="elevation_sweep.split_ratio")
        _check_sorted(self.irs_elements, "elevation_sweep.irs_elements")

    def angles_deg(self) -> list[float]:
        count = int(math.floor((self.stop_deg - self.start_deg) / self.step_deg + 1e-9)) + 1
        return [round(self.start_deg + k * self.step_deg, 10) for k in range(count)]


@dataclass(frozen=True)
class AssocStatsConfig:
    """
    Association-count experiment.

    Attributes:
        windows (int): Independent window realizations.
        window_radius (Optional[float]): Disk radius (m); None picks 200 interior BSs.
        m_max (int): Last stored index of the user-count PMF.
        n_max (int): Last stored index of the UAV-count PMF.
        wb_convention (str): "sampled" or "printed".
    """

    windows: int = 100
    window_radius: Optional[float] = None
    m_max: int = 60
    n_max: int = 60
    wb_convention: str = "sampled"

    def __post_init__(self) -> None:
        if self.windows < 1:
            raise ConfigError("need at least one window", field="assoc_stats.windows")
        if self.window_radius is not None and not self.window_radius > 0:
            raise ConfigError("window radius must be positive", field="assoc_stats.window_radius")
        if self.m_max < 0 or self.n_max < 0:
            raise ConfigError("PMF bounds must be >= 0", field="assoc_stats.m_max")
        if self.wb_convention not in ("sampled", "printed"):
            raise ConfigError(f"unknown convention {self.wb_convention!r}", field="assoc_stats.wb_convention")


@dataclass(frozen=True)
class OptimizerConfig:
    grid_points: int = 181
    resolution_deg: float = 0.01
    irs_elements: tuple[int, ...] = (8, 16, 32)
    split_ratio: float = 2.0

    def __post_init__(self) -> None:
        if self.grid_points < 2:
            raise ConfigError("need at least 2 grid points", field="optimizer.grid_points")
        if not self.resolution_deg > 0:
            raise ConfigError("resolution must be positive", field="optimizer.resolution_deg")
        if not self.split_ratio > 0:
            raise ConfigError("split ratio must be positive", field="optimizer.split_ratio")
        _check_sorted(self.irs_elements, "optimizer.irs_elements")


@dataclass(frozen=True)
class OutputsConfig:
    csv: Optional[str] = None
    svg: Optional[str] = None


@dataclass(frozen=True)
class ExperimentConfig:
    """
    The complete, validated experiment configuration.

    Attributes:
        network (NetworkParams): Network constants.
        elevation (ElevationConfig): Elevation distribution used by the power sweep
                                     and the association experiment.
        power_sweep (PowerSweepConfig): Settings of `power-sweep`.
        elevation_sweep (ElevationSweepConfig): Settings of `elevation-sweep`.
        assoc_stats (AssocStatsConfig): Settings of `assoc-stats`.
        optimizer (OptimizerConfig): Settings of `optimize`.
        simulation (SimConfig): Monte Carlo settings.
        quadrature (QuadratureSpec): Quadrature tolerance.
        mode (str): "analytic", "mc" or "both".
        weight_mode (str): "binomial" or "paper_literal".
        acceptance_tolerance (float): Allowed |analytic - mc| beyond the CI half-width.
        outputs (OutputsConfig): Output paths.
    """

    network: NetworkParams = field(default_factory=NetworkParams)
    elevation: ElevationConfig = field(default_factory=ElevationConfig)
    power_sweep: PowerSweepConfig = field(default_factory=PowerSweepConfig)
    elevation_sweep: ElevationSweepConfig = field(default_factory=ElevationSweepConfig)
    assoc_stats: AssocStatsConfig = field(default_factory=AssocStatsConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    simulation: SimConfig = field(default_factory=SimConfig)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    mode: str = "analytic"
    weight_mode: str = "binomial"
    acceptance_tolerance: float = 0.02
    outputs: OutputsConfig = field(default_factory=OutputsConfig)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"must be one of {MODES}, got {self.mode!r}", field="mode")
        try:
            object.__setattr__(self, "weight_mode", WeightMode.parse(self.weight_mode).value)
        except NomaError as e:
            raise ConfigError(str(e), field="weight_mode") from None
        if not self.acceptance_tolerance >= 0:
            raise ConfigError("must be >= 0", field="acceptance_tolerance")

    @property
    def analytic_enabled(self) -> bool:
        return self.mode in ("analytic", "both")

    @property
    def montecarlo_enabled(self) -> bool:
        return self.mode in ("mc", "both")

    def elevation_model(self) -> ElevationModel:
        return self.elevation.to_model()

    def split(self, ratio: float) -> PowerSplit:
        return PowerSplit.from_ratio(self.network, ratio)

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """
        Applies CLI overrides. Keys: trials, seed, workers, mode, weight_mode, out_csv, out_svg.
        None values are ignored.
        """
        sim_changes = {k: overrides[k] for k in ("trials", "seed", "workers") if overrides.get(k) is not None}
        out_changes = {
            name: overrides[key]
            for key, name in (("out_csv", "csv"), ("out_svg", "svg"))
            if overrides.get(key) is not None
        }
        top = {k: overrides[k] for k in ("mode", "weight_mode") if overrides.get(k) is not None}
        try:
            return replace(
                self,
                simulation=replace(self.simulation, **sim_changes),
                outputs=replace(self.outputs, **out_changes),
                **top,
            )
        except ConfigError:
            raise
        except NomaError as e:
            culprit = getattr(e, "field", "")
            raise ConfigError(str(e), field=f"simulation.{culprit}" if culprit else "simulation") from None

    def to_dict(self) -> dict[str, Any]:
        """Nested plain-data form; the inverse of `from_dict`."""
        return _plain(asdict(self))

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        """
        Builds and validates a configuration from nested plain data.

        Missing keys take their default values.

        Raises:
            ConfigError: On unknown keys, wrong types or invalid values, with the dotted
                         path of the offending entry.
        """
        if not isinstance(data, dict):
            raise ConfigError("configuration root must be a mapping")
        sections = {
            "network": NetworkParams,
            "elevation": ElevationConfig,
            "power_sweep": PowerSweepConfig,
            "elevation_sweep": ElevationSweepConfig,
            "assoc_stats": AssocStatsConfig,
            "optimizer": OptimizerConfig,
            "simulation": SimConfig,
            "quadrature": QuadratureSpec,
            "outputs": OutputsConfig,
        }
        scalars = ("mode", "weight_mode", "acceptance_tolerance")
        _reject_unknown(data, set(sections) | set(scalars), "")
        kwargs: dict[str, Any] = {}
        for name, section_cls in sections.items():
            if name in data:
                kwargs[name] = _build_section(section_cls, data[name], name)
        for name in scalars:
            if name in data:
                default = next(f for f in fields(cls) if f.name == name).default
                kwargs[name] = _coerce(data[name], type(default), name)
        try:
            return cls(**kwargs)
        except ConfigError:
            raise
        except NomaError as e:
            raise ConfigError(str(e)) from None


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _check_sorted(values: tuple, path: str, allow_empty: bool = False) -> None:
    if not values and not allow_empty:
        raise ConfigError("list must not be empty", field=path)
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("list must be strictly increasing", field=path)


def _reject_unknown(data: dict[str, Any], known: set[str], path: str) -> None:
    for key in data:
        if key not in known:
            raise ConfigError("unknown key", field=f"{path}.{key}" if path else str(key))


def _coerce(value: Any, kind: type, path: str) -> Any:
    """Converts a YAML scalar to the field type, rejecting lossy conversions."""
    if value is None:
        return None
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {value!r}", field=path)
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"expected an integer, got {value!r}", field=path)
        return int(value)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", field=path)
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", field=path)
        return value
    return value


def _field_kind(section_cls: type, name: str) -> tuple[type, bool]:
    """(scalar type, is_sequence) of a dataclass field, read from its default."""
    f = next(f for f in fields(section_cls) if f.name == name)
    default = f.default
    if isinstance(default, tuple):
        annotation = str(f.type)
        return (int if "int" in annotation else float), True
    if default is None:
        annotation = str(f.type)
        return (float if "float" in annotation else str), False
    return type(default), False


def _build_section(section_cls: type, data: Any, path: str) -> Any:
    if data is None:
        return section_cls()
    if not isinstance(data, dict):
        raise ConfigError("expected a mapping", field=path)
    known = {f.name for f in fields(section_cls)}
    _reject_unknown(data, known, path)
    kwargs: dict[str, Any] = {}
    for name, value in data.items():
        kind, is_sequence = _field_kind(section_cls, name)
        field_path = f"{path}.{name}"
        if is_sequence:
            if not isinstance(value, (list, tuple)):
                raise ConfigError("expected a list", field=field_path)
            kwargs[name] = tuple(_coerce(v, kind, f"{field_path}[{i}]") for i, v in enumerate(value))
        else:
            kwargs[name] = _coerce(value, kind, field_path)
    try:
        return section_cls(**kwargs)
    except ConfigError:
        raise
    except NomaError as e:
        culprit = getattr(e, "field", "")
        raise ConfigError(str(e), field=f"{path}.{culprit}" if culprit else path) from None
