"""
Closed-form association statistics.

Each BS serves the users of its Voronoi cell and the UAVs that pick it under the
biased rule arg max L * cos(theta)**alpha * d**-alpha. The number of users M and the
number of UAVs N attached to a typical BS follow the Gamma-approximation of the
Voronoi cell area, which makes both counts negative binomial with shape 7/2:

    P[M = m] = Gamma(m + 7/2) / (m! Gamma(7/2)) * q**m * (1 + q)**-(m + 7/2),  q = 2 mu / (7 lambda_B)

For N the user density is replaced by the UAV density and lambda_B by w_b * lambda_B.
"""
from __future__ import annotations

import math
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import DomainError
from .network_model import ElevationModel, GroundPoint, NetworkParams, UavPoint, los_probability
from .special_math import DEFAULT_QUADRATURE, QuadratureSpec, expect_over_theta

logger = logging.getLogger(__name__)

# Shape of the Gamma approximation to the normalized Voronoi cell area.
CELL_SHAPE = 3.5

WB_CONVENTIONS = ("sampled", "printed")


@dataclass(frozen=True)
class PmfVector:
    """
    A probability mass function on 0..K with the mass beyond K kept separately.

    Attributes:
        probs (tuple[float, ...]): P[X = k] for k = 0..K.
        truncation_mass (float): P[X > K].
    """

    probs: tuple[float, ...]
    truncation_mass: float

    def __post_init__(self) -> None:
        probs = tuple(float(p) for p in self.probs)
        if any(p < 0.0 or p > 1.0 for p in probs):
            raise DomainError("PMF entries must lie in [0, 1]")
        if not 0.0 <= self.truncation_mass <= 1.0:
            raise DomainError(f"Truncation mass must lie in [0, 1], got {self.truncation_mass}")
        total = math.fsum(probs) + self.truncation_mass
        if abs(total - 1.0) > 1e-9:
            raise DomainError(f"PMF does not normalize: entries plus tail sum to {total!r}")
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probs, dtype=float)

    def mean(self) -> float:
        """Mean of the stored entries. The tail beyond K is ignored."""
        return float(np.dot(np.arange(len(self.probs)), self.as_array()))


def total_variation(pmf: PmfVector, counts: Sequence[int] | np.ndarray) -> float:
    """
    Total variation distance between `pmf` and the empirical law of `counts`.

    `counts` holds one observed count per sample (not a histogram). Observations above
    the last PMF index are pooled into one bin that is compared with the truncation mass.

    Args:
        pmf (PmfVector): The analytic PMF.
        counts (Sequence[int] | np.ndarray): Observed counts.

    Returns:
        float: Half the L1 distance, in [0, 1].

    Raises:
        DomainError: If `counts` is empty.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.size == 0:
        raise DomainError("Cannot compare a PMF with an empty sample")
    size = len(pmf)
    hist = np.bincount(np.minimum(counts, size), minlength=size + 1).astype(float) / counts.size
    analytic = np.append(pmf.as_array(), pmf.truncation_mass)
    return 0.5 * float(np.abs(analytic - hist).sum())


def association_weight_wb(
    params: NetworkParams,
    elevation: ElevationModel,
    q: QuadratureSpec = DEFAULT_QUADRATURE,
    convention: str = "sampled",
) -> float:
    """
    Computes w_b = E[cos^2(Theta) E[L^x|Theta]] * E[sec^2(Theta) E[L^-x|Theta]], x = 2/alpha.

    Under the "sampled" convention E[L^x|Theta] = rho*eta^x + (1 - rho), which is the law
    `sample_los_factor` draws from. The "printed" convention evaluates the bracket
    rho*(1 - eta^x) + eta^x, where the roles of rho and 1 - rho are exchanged.

    Args:
        params (NetworkParams): Network parameters.
        elevation (ElevationModel): Distribution of Theta.
        q (QuadratureSpec): Tolerance for uniform elevation models.
        convention (str): "sampled" (default) or "printed".

    Returns:
        float: The association weight, >= 1.

    Raises:
        DomainError: On an unknown convention.
    """
    if convention not in WB_CONVENTIONS:
        raise DomainError(f"Unknown w_b convention {convention!r}; expected one of {WB_CONVENTIONS}")
    x = params.psi_exponent
    gain_up = params.los_enhancement ** x
    gain_down = params.los_enhancement ** (-x)

    def los_moment(rho: float, gain: float) -> float:
        if convention == "sampled":
            return rho * gain + (1.0 - rho)
        return rho * (1.0 - gain) + gain

    def first(theta: float) -> float:
        return math.cos(theta) ** 2 * los_moment(los_probability(theta, params), gain_up)

    def second(theta: float) -> float:
        return los_moment(los_probability(theta, params), gain_down) / math.cos(theta) ** 2

    w_b = expect_over_theta(first, elevation, q) * expect_over_theta(second, elevation, q)
    logger.debug(f"w_b = {w_b:.6f} ({convention} convention)")
    return w_b


def _negative_binomial_pmf(ratio: float, k_max: int) -> PmfVector:
    """PMF of the shape-7/2 negative binomial with mean `ratio`, in log space."""
    if k_max < 0:
        raise DomainError(f"PMF length bound must be >= 0, got {k_max}")
    if not ratio > 0 or not math.isfinite(ratio):
        raise DomainError(f"Density ratio must be positive and finite, got {ratio}")
    q_ratio = ratio / CELL_SHAPE
    success = 1.0 / (1.0 + q_ratio)
    k = np.arange(k_max + 1)
    probs = np.exp(stats.nbinom.logpmf(k, CELL_SHAPE, success))
    tail = float(stats.nbinom.sf(k_max, CELL_SHAPE, success))
    return PmfVector(tuple(probs), tail)


def pmf_users(params: NetworkParams, m_max: int) -> PmfVector:
    """
    PMF of the number of users attached to a typical BS.

    Args:
        params (NetworkParams): Supplies mu and lambda_B.
        m_max (int): Largest stored count.

    Returns:
        PmfVector: Entries 0..m_max plus the tail mass.
    """
    return _negative_binomial_pmf(params.user_density / params.bs_density, m_max)


def pmf_uavs(
    params: NetworkParams,
    elevation: ElevationModel,
    n_max: int,
    q: QuadratureSpec = DEFAULT_QUADRATURE,
    convention: str = "sampled",
) -> PmfVector:
    """
    PMF of the number of UAVs attached to a typical BS, with lambda_B scaled by w_b.
    """
    w_b = association_weight_wb(params, elevation, q, convention)
    return _negative_binomial_pmf(params.uav_density / (w_b * params.bs_density), n_max)


def association_log_score(
    los_factor: np.ndarray | float,
    theta: np.ndarray | float,
    distance: np.ndarray | float,
    pathloss_exponent: float,
) -> np.ndarray:
    """
    log(L * cos(theta)**alpha * d**-alpha), vectorized. A zero distance scores +inf.
    """
    with np.errstate(divide="ignore"):
        return (
            np.log(los_factor)
            + pathloss_exponent * np.log(np.cos(theta))
            - pathloss_exponent * np.log(distance)
        )


def uav_association_pick(
    uav: UavPoint,
    bss: Sequence[GroundPoint],
    thetas: Sequence[float],
    los_factors: Sequence[float],
    pathloss_exponent: float,
) -> int:
    """
    Index of the BS a UAV associates with.

    Args:
        uav (UavPoint): The UAV; distances are measured from its ground projection.
        bss (Sequence[GroundPoint]): Candidate BSs.
        thetas (Sequence[float]): Elevation angle drawn for each BS pair.
        los_factors (Sequence[float]): LoS factor drawn for each BS pair.
        pathloss_exponent (float): alpha.

    Returns:
        int: The maximizing index; ties go to the lowest index.

    Raises:
        DomainError: If `bss` is empty or the draw lists have the wrong length.
    """
    if not bss:
        raise DomainError("Cannot associate a UAV with an empty BS list")
    if len(thetas) != len(bss) or len(los_factors) != len(bss):
        raise DomainError(
            f"Need one (theta, L) pair per BS: got {len(thetas)} angles and "
            f"{len(los_factors)} factors for {len(bss)} BSs"
        )
    distances = np.array([uav.projection.distance_to(b) for b in bss])
    scores = association_log_score(
        np.asarray(los_factors, dtype=float), np.asarray(thetas, dtype=float), distances, pathloss_exponent
    )
    return int(np.argmax(scores))
