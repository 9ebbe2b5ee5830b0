"""
This module defines the network parameter bundles and the geometric/channel primitives
of the UAV-IRS NOMA model: the low-altitude-platform LoS probability, the Bernoulli LoS
enhancement factor, the reflected path length for a UAV hovering above the midpoint of
the BS-to-far-user segment, and homogeneous Poisson point samplers.

All angles are in radians. The LoS constants (c1, c2) were fitted on radian input, so
passing degrees changes the LoS probability drastically.
"""
from __future__ import annotations

import math
import logging
from dataclasses import asdict, dataclass, replace
from typing import Any

import numpy as np

from .errors import DomainError

logger = logging.getLogger(__name__)

HALF_PI = math.pi / 2.0


@dataclass(frozen=True)
class NetworkParams:
    """
    Scalar constants of the network.

    Attributes:
        tx_power_watts (float): BS transmit power P (W).
        bs_density (float): BS density lambda_B (BSs/m^2).
        uav_density (float): UAV density lambda_D (UAVs/m^2).
        user_density (float): User density mu (users/m^2).
        pathloss_exponent (float): alpha > 2.
        los_enhancement (float): 3D LoS channel enhancement factor eta >= 1.
        los_c1 (float): LAP constant c1 (radian input).
        los_c2 (float): LAP constant c2.
        irs_elements (int): Number R of IRS reflecting elements.
        sir_threshold (float): SIR threshold beta.
    """

    tx_power_watts: float = 30.0
    bs_density: float = 1e-5
    uav_density: float = 1e-4
    user_density: float = 1e-4
    pathloss_exponent: float = 3.0
    los_enhancement: float = 2.5
    los_c1: float = 24.5811
    los_c2: float = 39.5971
    irs_elements: int = 8
    sir_threshold: float = 0.5

    def __post_init__(self) -> None:
        checks = {
            "tx_power_watts": self.tx_power_watts > 0,
            "bs_density": self.bs_density > 0,
            "uav_density": self.uav_density > 0,
            "user_density": self.user_density > 0,
            "pathloss_exponent": self.pathloss_exponent > 2,
            "los_enhancement": self.los_enhancement >= 1,
            "los_c1": self.los_c1 > 0,
            "los_c2": self.los_c2 > 0,
            "irs_elements": self.irs_elements >= 1,
            "sir_threshold": self.sir_threshold > 0,
        }
        for name, ok in checks.items():
            if not ok:
                raise DomainError(f"Invalid network parameter {name}={getattr(self, name)!r}", field=name)
        if int(self.irs_elements) != self.irs_elements:
            raise DomainError(f"irs_elements must be an integer, got {self.irs_elements!r}", field="irs_elements")
        object.__setattr__(self, "irs_elements", int(self.irs_elements))

    @property
    def psi_exponent(self) -> float:
        """The exponent 2/alpha used by Psi."""
        return 2.0 / self.pathloss_exponent

    def with_irs_elements(self, irs_elements: int) -> "NetworkParams":
        return replace(self, irs_elements=irs_elements)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "NetworkParams":
        return cls(**data)


@dataclass(frozen=True)
class PowerSplit:
    """
    NOMA power pair.

    Attributes:
        p_near (float): Power P_n for the near user's signal (W).
        p_far (float): Power P_f for the far user's signal (W).
    """

    p_near: float
    p_far: float

    def __post_init__(self) -> None:
        if self.p_near < 0 or self.p_far < 0:
            raise DomainError(f"Powers must be non-negative, got P_n={self.p_near}, P_f={self.p_far}")

    @property
    def total(self) -> float:
        return self.p_near + self.p_far

    def check_total(self, params: NetworkParams, rel_tol: float = 1e-9) -> None:
        """
        Ensures P_n + P_f equals the transmit power of `params`.

        Raises:
            DomainError: If the powers do not add up.
        """
        if not math.isclose(self.total, params.tx_power_watts, rel_tol=rel_tol, abs_tol=1e-12):
            raise DomainError(
                f"P_n + P_f = {self.total} does not match transmit power {params.tx_power_watts}"
            )

    @classmethod
    def from_ratio(cls, params: NetworkParams, ratio: float) -> "PowerSplit":
        """Builds the split with P_n/P_f = ratio and P_n + P_f = P."""
        if not ratio > 0 or not math.isfinite(ratio):
            raise DomainError(f"Power ratio must be positive and finite, got {ratio}")
        p_far = params.tx_power_watts / (1.0 + ratio)
        return cls(params.tx_power_watts - p_far, p_far)


@dataclass(frozen=True)
class ElevationModel:
    """
    Distribution of the UAV elevation angle Theta (radians).

    Use the `deterministic` and `uniform` factories rather than the constructor.

    Attributes:
        kind (str): "deterministic" or "uniform".
        theta (float): The angle of a deterministic model.
        theta_lo (float): Lower bound of a uniform model.
        theta_hi (float): Upper bound of a uniform model.
    """

    kind: str
    theta: float = 0.0
    theta_lo: float = 0.0
    theta_hi: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "deterministic":
            _check_angle(self.theta, "theta")
        elif self.kind == "uniform":
            _check_angle(self.theta_lo, "theta_lo")
            _check_angle(self.theta_hi, "theta_hi")
            if not self.theta_lo < self.theta_hi:
                raise DomainError(f"Uniform elevation needs theta_lo < theta_hi, got {self.theta_lo}, {self.theta_hi}")
        else:
            raise DomainError(f"Unknown elevation model kind {self.kind!r}")

    @classmethod
    def deterministic(cls, theta: float) -> "ElevationModel":
        return cls("deterministic", theta=theta)

    @classmethod
    def uniform(cls, theta_lo: float, theta_hi: float) -> "ElevationModel":
        """A uniform model; a zero-width interval collapses to a deterministic one."""
        if theta_lo == theta_hi:
            return cls.deterministic(theta_lo)
        return cls("uniform", theta_lo=theta_lo, theta_hi=theta_hi)

    @property
    def is_deterministic(self) -> bool:
        return self.kind == "deterministic"

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.is_deterministic:
            return np.full(size, self.theta)
        return rng.uniform(self.theta_lo, self.theta_hi, size)


@dataclass(frozen=True)
class GroundPoint:
    """Planar ground location in metres."""

    x: float
    y: float

    def distance_to(self, other: "GroundPoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class UavPoint:
    """A UAV given by its ground projection and its elevation angle (radians)."""

    projection: GroundPoint
    elevation: float

    def __post_init__(self) -> None:
        _check_angle(self.elevation, "elevation")


def _check_angle(theta: float, name: str = "theta") -> None:
    if not 0.0 < theta < HALF_PI:
        raise DomainError(f"{name} must lie strictly inside (0, pi/2) radians, got {theta}")


def los_probability(theta: float, params: NetworkParams) -> float:
    """
    LoS probability of a 3D link, 1 / (1 + c2 * exp(-c1 * theta)).

    Args:
        theta (float): Elevation angle in radians, inside (0, pi/2).
        params (NetworkParams): Supplies (c1, c2).

    Returns:
        float: Probability in (0, 1).
    """
    _check_angle(theta)
    return 1.0 / (1.0 + params.los_c2 * math.exp(-params.los_c1 * theta))


def los_probability_array(theta: np.ndarray, params: NetworkParams) -> np.ndarray:
    """Vectorized `los_probability` without domain checks."""
    return 1.0 / (1.0 + params.los_c2 * np.exp(-params.los_c1 * np.asarray(theta, dtype=float)))


def sample_los_factor(theta: float, params: NetworkParams, rng: np.random.Generator) -> float:
    """
    Draws the LoS factor L: eta with probability rho(theta), 1 otherwise.
    """
    return params.los_enhancement if rng.random() < los_probability(theta, params) else 1.0


def sample_los_factors(theta: np.ndarray, params: NetworkParams, rng: np.random.Generator) -> np.ndarray:
    """Independent LoS factors for an array of angles."""
    theta = np.asarray(theta, dtype=float)
    los = rng.random(theta.shape) < los_probability_array(theta, params)
    return np.where(los, params.los_enhancement, 1.0)


def relay_path_length(user_distance: float, theta: float) -> float:
    """
    Length of the reflected path BS -> UAV -> far user, sec(theta) * user_distance,
    for a UAV hovering above the midpoint of the BS-user segment.
    """
    if not user_distance > 0:
        raise DomainError(f"user_distance must be > 0, got {user_distance}")
    _check_angle(theta)
    return user_distance / math.cos(theta)


def sample_hppp_annulus(density: float, r_min: float, r_max: float, rng: np.random.Generator) -> np.ndarray:
    """
    Samples an HPPP restricted to the annulus r_min <= r < r_max around the origin.

    Returns:
        np.ndarray: Array of shape (n, 2) with planar coordinates.
    """
    if density < 0:
        raise DomainError(f"density must be >= 0, got {density}")
    if not 0.0 <= r_min < r_max:
        raise DomainError(f"Need 0 <= r_min < r_max, got {r_min}, {r_max}")
    count = rng.poisson(density * math.pi * (r_max ** 2 - r_min ** 2)) if density > 0 else 0
    radius = np.sqrt(r_min ** 2 + rng.random(count) * (r_max ** 2 - r_min ** 2))
    angle = rng.uniform(0.0, 2.0 * math.pi, count)
    return np.column_stack((radius * np.cos(angle), radius * np.sin(angle)))


def sample_hppp_disk(density: float, r_min: float, r_max: float, rng: np.random.Generator) -> list[GroundPoint]:
    """
    Samples an HPPP in an annulus and returns the points as `GroundPoint`s.
    """
    return [GroundPoint(float(x), float(y)) for x, y in sample_hppp_annulus(density, r_min, r_max, rng)]
