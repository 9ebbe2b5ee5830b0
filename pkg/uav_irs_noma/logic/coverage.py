"""
This module evaluates the closed-form coverage probabilities of the NOMA pair served by a
typical BS: the near user (direct ground link) and the far user (reflected by the IRS on
the UAV hovering above the midpoint of the BS-to-far-user segment).

Both results are built from the interference functional Psi of `special_math`. The far
user needs the (R-1)-th t-derivative of t**(R-1)/(R-1)! * h(t), where

    h(t) = prod_{k=1,2} [1 + Psi(2/alpha, 1/t) / k]**-1,

which is obtained from truncated Taylor series carried at extended precision
(`series_jet`).
"""
from __future__ import annotations

import math
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .errors import CoverageRangeError, DomainError, SeriesError
from .network_model import ElevationModel, NetworkParams, PowerSplit, los_probability
from .series_jet import (
    MAX_SERIES_ORDER,
    SeriesJet,
    jet_reciprocal,
    jet_shift_monomial,
    psi_recip_jet,
)
from .special_math import DEFAULT_QUADRATURE, QuadratureSpec, expect_over_theta, psi

logger = logging.getLogger(__name__)

# Allowed excursion outside [0, 1]. Series arithmetic keeps ~40 digits at the order cap,
# so what remains is the quadrature error of the Psi seeds (abs_tol 1e-10).
RANGE_SLACK = 1e-9


class NomaRegime(str, Enum):
    """Case split of the coverage formulas for one user role."""

    NEAR_DOMINANT = "NearDominant"
    FAR_DOMINANT = "FarDominant"
    NEAR_SIC = "NearSic"
    FAR_SIC = "FarSic"
    DEAD_ZONE = "DeadZone"


class WeightMode(str, Enum):
    """Weights of the LoS-hop count i in {0, 1, 2} of the reflected path."""

    BINOMIAL = "binomial"
    PAPER_LITERAL = "paper_literal"

    @classmethod
    def parse(cls, value: "WeightMode | str") -> "WeightMode":
        """Accepts enum members and the CLI spelling with a hyphen."""
        if isinstance(value, WeightMode):
            return value
        try:
            return cls(str(value).replace("-", "_"))
        except ValueError:
            raise DomainError(f"Unknown weight mode {value!r}") from None


@dataclass(frozen=True)
class CoverageValue:
    """
    A coverage probability and the regime that produced it.

    Attributes:
        value (float): Probability in [0, 1].
        regime (NomaRegime): The branch of the formula that applied.
    """

    value: float
    regime: NomaRegime

    def __post_init__(self) -> None:
        if not (-RANGE_SLACK <= self.value <= 1.0 + RANGE_SLACK) or math.isnan(self.value):
            raise CoverageRangeError(f"Coverage {self.value!r} in regime {self.regime.value} is outside [0, 1]")

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class PowerPolicy:
    """
    Power-allocation thresholds.

    Attributes:
        near_threshold_ratio (float): c_n is maximized for P_n / P_f above this value.
        far_threshold_ratio (float): c_f is maximized for P_f / P_n above this value.
        recommended (str): The user role the recommended policy favours.
        description (str): Human readable summary.
    """

    near_threshold_ratio: float
    far_threshold_ratio: float
    recommended: str
    description: str


def near_regime(split: PowerSplit, beta: float) -> NomaRegime:
    if split.p_near > max(1.0, beta) * split.p_far:
        return NomaRegime.NEAR_DOMINANT
    if split.p_near <= split.p_far:
        return NomaRegime.NEAR_SIC
    return NomaRegime.DEAD_ZONE


def far_regime(split: PowerSplit, beta: float) -> NomaRegime:
    if split.p_far > max(1.0, beta) * split.p_near:
        return NomaRegime.FAR_DOMINANT
    if split.p_far <= split.p_near:
        return NomaRegime.FAR_SIC
    return NomaRegime.DEAD_ZONE


def _near_formula(x: float, y: float, q: QuadratureSpec) -> float:
    return 1.0 / (1.0 + psi(x, y, q))


def coverage_near(params: NetworkParams, split: PowerSplit, q: QuadratureSpec = DEFAULT_QUADRATURE) -> CoverageValue:
    """
    Coverage probability c_n of the near user.

    NearDominant: [1 + Psi(2/alpha, P*beta / (P_n - beta*P_f))]**-1.
    NearSic: the intra-cell term is cancelled, [1 + Psi(2/alpha, P*beta / P_n)]**-1.
    DeadZone: 0.

    Args:
        params (NetworkParams): Network parameters.
        split (PowerSplit): Power pair; must add up to P.
        q (QuadratureSpec): Tolerance for Psi.

    Returns:
        CoverageValue: c_n with its regime.
    """
    split.check_total(params)
    beta = params.sir_threshold
    x = params.psi_exponent
    regime = near_regime(split, beta)
    if regime is NomaRegime.NEAR_DOMINANT:
        value = _near_formula(x, params.tx_power_watts * beta / (split.p_near - beta * split.p_far), q)
    elif regime is NomaRegime.NEAR_SIC and split.p_near > 0:
        value = _near_formula(x, params.tx_power_watts * beta / split.p_near, q)
    else:
        value = 0.0
    logger.debug(f"c_n = {value:.6f} at P_n={split.p_near}, P_f={split.p_far} ({regime.value})")
    return CoverageValue(value, regime)


def near_branch_jump(params: NetworkParams, p_near: float | None = None, q: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """
    Difference between the NearSic and the NearDominant formula at P_n = P_f.

    The NearDominant formula is taken as 0 when P_n - beta*P_f <= 0. The result is
    never negative since cancelling the intra-cell term cannot lower coverage.

    Args:
        params (NetworkParams): Network parameters.
        p_near (float | None): Common power level; defaults to P/2.
        q (QuadratureSpec): Tolerance for Psi.

    Returns:
        float: The jump.
    """
    level = params.tx_power_watts / 2.0 if p_near is None else p_near
    if not level > 0:
        raise DomainError(f"Power level must be > 0, got {level}")
    beta = params.sir_threshold
    x = params.psi_exponent
    sic = _near_formula(x, params.tx_power_watts * beta / level, q)
    margin = level * (1.0 - beta)
    dominant = _near_formula(x, params.tx_power_watts * beta / margin, q) if margin > 0 else 0.0
    return sic - dominant


@lru_cache(maxsize=4096)
def _far_term(x: float, tau: float, order: int, q: QuadratureSpec) -> float:
    """d^order/dt^order [t**order / order! * h(t)] at t = tau, i.e. the coefficient a_order."""
    if tau <= 0.0:
        return 0.0
    g = psi_recip_jet(x, tau, order, q)
    h = jet_reciprocal((1.0 + g) * (2.0 + g)) * 2.0
    f: SeriesJet = jet_shift_monomial(order, tau, order) * h
    return f.coefficient(order)


def _far_base(params: NetworkParams, split: PowerSplit, regime: NomaRegime) -> float:
    """tau_i without the eta**i * cos(Theta)**alpha factor."""
    beta = params.sir_threshold
    scale = beta * params.tx_power_watts
    if regime is NomaRegime.FAR_DOMINANT:
        return (split.p_far - beta * split.p_near) / scale
    if regime is NomaRegime.FAR_SIC:
        return split.p_far / scale
    return 0.0


def hop_weights(rho: float, weight_mode: WeightMode | str = WeightMode.BINOMIAL) -> tuple[float, float, float]:
    """
    Weights of i = 0, 1, 2 LoS hops on the reflected path.

    The binomial law C(2, i) rho**i (1 - rho)**(2 - i) sums to 1; the paper-literal mode
    drops the factor 2 on the mixed term.
    """
    mode = WeightMode.parse(weight_mode)
    mixed = rho * (1.0 - rho)
    if mode is WeightMode.BINOMIAL:
        mixed *= 2.0
    return ((1.0 - rho) ** 2, mixed, rho ** 2)


def coverage_far(
    params: NetworkParams,
    split: PowerSplit,
    elevation: ElevationModel,
    q: QuadratureSpec = DEFAULT_QUADRATURE,
    weight_mode: WeightMode | str = WeightMode.BINOMIAL,
) -> CoverageValue:
    """
    Coverage probability c_f of the far user served through the UAV-mounted IRS.

    The direct ground path is neglected. For i LoS hops the evaluation point is
    tau_i = eta**i * base * cos(Theta)**alpha, with base = (P_f - beta*P_n)/(beta*P) in
    the FarDominant regime and P_f/(beta*P) in the FarSic regime; the DeadZone gives 0.

    Args:
        params (NetworkParams): Network parameters, including the IRS size R.
        split (PowerSplit): Power pair; must add up to P.
        elevation (ElevationModel): Distribution of Theta.
        q (QuadratureSpec): Tolerance for Psi and the elevation expectation.
        weight_mode (WeightMode | str): LoS-hop weights.

    Returns:
        CoverageValue: c_f with its regime.

    Raises:
        SeriesError: If R - 1 exceeds the series order cap.
        CoverageRangeError: If the result leaves [0, 1].
    """
    split.check_total(params)
    mode = WeightMode.parse(weight_mode)
    order = params.irs_elements - 1
    if order > MAX_SERIES_ORDER:
        raise SeriesError(f"R = {params.irs_elements} exceeds the supported maximum of {MAX_SERIES_ORDER + 1}")
    regime = far_regime(split, params.sir_threshold)
    base = _far_base(params, split, regime)
    if base <= 0.0:
        return CoverageValue(0.0, regime)
    x = params.psi_exponent
    alpha = params.pathloss_exponent
    eta = params.los_enhancement

    def conditional(theta: float) -> float:
        weights = hop_weights(los_probability(theta, params), mode)
        shrink = math.cos(theta) ** alpha
        return sum(
            w * _far_term(x, eta ** i * base * shrink, order, q) for i, w in enumerate(weights) if w > 0.0
        )

    value = expect_over_theta(conditional, elevation, q)
    logger.debug(f"c_f = {value:.6f} with R={params.irs_elements} ({regime.value}, {mode.value} weights)")
    return CoverageValue(value, regime)


def coverage_far_without_uav(
    params: NetworkParams, split: PowerSplit, q: QuadratureSpec = DEFAULT_QUADRATURE
) -> CoverageValue:
    """
    Coverage of the far user over the direct ground link only (no UAV relay).

    This is the R = 1, eta = 1, Theta = 0 instance of the far-user formula.
    """
    split.check_total(params)
    regime = far_regime(split, params.sir_threshold)
    base = _far_base(params, split, regime)
    return CoverageValue(_far_term(params.psi_exponent, base, 0, q), regime)


def optimal_power_policy(params: NetworkParams) -> PowerPolicy:
    """
    Power-allocation thresholds that maximize c_n and c_f.

    c_n is maximized for P_n > (1 + 2*beta) * P_f and c_f for the mirrored condition
    P_f > (1 + 2*beta) * P_n. The recommendation favours the near user: its coverage
    drives the SIC step, while the far user is compensated by the IRS.
    """
    ratio = 1.0 + 2.0 * params.sir_threshold
    return PowerPolicy(
        near_threshold_ratio=ratio,
        far_threshold_ratio=ratio,
        recommended="near",
        description=f"P_n / P_f > {ratio:g} maximizes c_n; P_f / P_n > {ratio:g} maximizes c_f; "
        f"recommended: P_n / P_f > {ratio:g}",
    )


def elevation_upper_bound(params: NetworkParams) -> float:
    """
    Largest useful elevation angle arccos(eta**(-2/alpha)), in radians.

    Beyond it the LoS gain no longer compensates the longer reflected path. Returns 0
    for eta = 1.
    """
    return math.acos(params.los_enhancement ** (-params.psi_exponent))
