import math

import numpy as np
import pytest
from mpmath import mp
from scipy.integrate import trapezoid

from uav_irs_noma.logic.coverage import (
    RANGE_SLACK,
    CoverageValue,
    NomaRegime,
    WeightMode,
    _far_term,
    coverage_far,
    coverage_far_without_uav,
    coverage_near,
    elevation_upper_bound,
    hop_weights,
    near_branch_jump,
    optimal_power_policy,
)
from uav_irs_noma.logic.errors import CoverageRangeError, DomainError, SeriesError
from uav_irs_noma.logic.network_model import ElevationModel, NetworkParams, PowerSplit, los_probability
from uav_irs_noma.logic.special_math import DEFAULT_QUADRATURE, psi

THETA_15 = ElevationModel.deterministic(math.radians(15.0))


@pytest.fixture
def params():
    return NetworkParams()


def h(x, t):
    g = psi(x, 1.0 / t)
    return 2.0 / ((1.0 + g) * (2.0 + g))


def taus(params, split, theta):
    beta = params.sir_threshold
    base = (split.p_far - beta * split.p_near if split.p_far > split.p_near else split.p_far) / (
        beta * params.tx_power_watts
    )
    return [params.los_enhancement ** i * base * math.cos(theta) ** params.pathloss_exponent for i in range(3)]


def test_near_coverage_closed_form_at_sic_boundary():
    params = NetworkParams(pathloss_exponent=4.0)
    value = coverage_near(params, PowerSplit(15.0, 15.0))
    assert value.regime is NomaRegime.NEAR_SIC
    assert value.value == pytest.approx(1.0 / (1.0 + math.pi / 4), abs=1e-9)


def test_near_coverage_oma_limit(params):
    value = coverage_near(params, PowerSplit(30.0, 0.0))
    assert value.regime is NomaRegime.NEAR_DOMINANT
    assert value.value == pytest.approx(1.0 / (1.0 + psi(2.0 / 3.0, 0.5)), rel=1e-12)


def test_near_coverage_zero_power(params):
    assert coverage_near(params, PowerSplit(0.0, 30.0)).value == 0.0


def test_near_dead_zone():
    params = NetworkParams(sir_threshold=2.0)
    value = coverage_near(params, PowerSplit(18.0, 12.0))
    assert value.regime is NomaRegime.DEAD_ZONE
    assert value.value == 0.0


@pytest.mark.parametrize("ratios", [np.linspace(1.05, 10.0, 12), np.linspace(0.1, 1.0, 12)])
def test_near_coverage_increases_within_branch(params, ratios):
    values = [coverage_near(params, PowerSplit.from_ratio(params, r)).value for r in ratios]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_split_must_match_total_power(params):
    with pytest.raises(DomainError):
        coverage_near(params, PowerSplit(10.0, 10.0))


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_sic_branch_jump_is_nonnegative(beta):
    assert near_branch_jump(NetworkParams(sir_threshold=beta)) >= 0.0


def test_far_coverage_single_element_is_function_value(params):
    sized = params.with_irs_elements(1)
    split = PowerSplit(20.0, 10.0)
    theta = math.radians(15.0)
    rho = los_probability(theta, params)
    weights = [(1 - rho) ** 2, 2 * rho * (1 - rho), rho ** 2]
    expected = sum(w * h(2.0 / 3.0, tau) for w, tau in zip(weights, taus(params, split, theta)))
    value = coverage_far(sized, split, THETA_15)
    assert value.regime is NomaRegime.FAR_SIC
    assert value.value == pytest.approx(expected, rel=1e-10)


def test_far_coverage_two_elements_matches_finite_difference(params):
    sized = params.with_irs_elements(2)
    split = PowerSplit(10.0, 20.0)
    theta = math.radians(15.0)
    rho = los_probability(theta, params)
    weights = [(1 - rho) ** 2, 2 * rho * (1 - rho), rho ** 2]
    step = 1e-4

    def first_derivative(tau):
        f = lambda t: t * h(2.0 / 3.0, t)  # noqa: E731
        return (f(tau + step) - f(tau - step)) / (2 * step)

    expected = sum(w * first_derivative(tau) for w, tau in zip(weights, taus(params, split, theta)))
    value = coverage_far(sized, split, THETA_15)
    assert value.regime is NomaRegime.FAR_DOMINANT
    assert value.value == pytest.approx(expected, abs=1e-5)


def test_far_coverage_three_elements_matches_second_difference(params):
    sized = params.with_irs_elements(3)
    split = PowerSplit(20.0, 10.0)
    theta = math.radians(15.0)
    rho = los_probability(theta, params)
    weights = [(1 - rho) ** 2, 2 * rho * (1 - rho), rho ** 2]
    step = 1e-3

    def second_derivative(tau):
        f = lambda t: t * t / 2.0 * h(2.0 / 3.0, t)  # noqa: E731
        return (f(tau + step) - 2 * f(tau) + f(tau - step)) / step ** 2

    expected = sum(w * second_derivative(tau) for w, tau in zip(weights, taus(params, split, theta)))
    assert coverage_far(sized, split, THETA_15).value == pytest.approx(expected, abs=5e-4)


def test_far_coverage_ignores_rho_without_los_gain():
    split = PowerSplit(20.0, 10.0)
    a = coverage_far(NetworkParams(los_enhancement=1.0), split, THETA_15)
    b = coverage_far(NetworkParams(los_enhancement=1.0, los_c2=5.0), split, THETA_15)
    assert a.value == pytest.approx(b.value, rel=1e-12)


def test_binomial_weights_sum_to_one():
    for rho in (0.0, 0.3, 0.94, 1.0):
        assert math.fsum(hop_weights(rho, WeightMode.BINOMIAL)) == pytest.approx(1.0, abs=1e-15)
    assert math.fsum(hop_weights(0.5, "paper-literal")) == pytest.approx(0.75)


def test_paper_literal_weights_lower_coverage(params):
    split = PowerSplit(20.0, 10.0)
    binomial = coverage_far(params, split, THETA_15, weight_mode="binomial").value
    literal = coverage_far(params, split, THETA_15, weight_mode=WeightMode.PAPER_LITERAL).value
    assert literal < binomial


def test_far_coverage_nondecreasing_in_irs_size(params):
    split = PowerSplit(20.0, 10.0)
    values = [coverage_far(params.with_irs_elements(r), split, THETA_15).value for r in (1, 2, 4, 8, 16, 32, 48, 64)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))


def test_far_coverage_rejects_oversized_irs(params):
    with pytest.raises(SeriesError):
        coverage_far(params.with_irs_elements(65), PowerSplit(20.0, 10.0), THETA_15)


def test_far_dead_zone_and_zero_power():
    params = NetworkParams(sir_threshold=2.0)
    dead = coverage_far(params, PowerSplit(12.0, 18.0), THETA_15)
    assert dead.regime is NomaRegime.DEAD_ZONE
    assert dead.value == 0.0
    assert coverage_far(NetworkParams(), PowerSplit(30.0, 0.0), THETA_15).value == 0.0


def test_far_coverage_uniform_elevation_is_average(params):
    sized = params.with_irs_elements(2)
    split = PowerSplit(20.0, 10.0)
    lo, hi = math.radians(10.0), math.radians(20.0)
    grid = np.linspace(lo, hi, 41)
    values = [coverage_far(sized, split, ElevationModel.deterministic(t)).value for t in grid]
    average = trapezoid(values, grid) / (hi - lo)
    assert coverage_far(sized, split, ElevationModel.uniform(lo, hi)).value == pytest.approx(average, abs=1e-4)


@pytest.mark.parametrize("ratio", [0.5, 1.0, 2.0, 4.0])
def test_far_user_beats_near_user_with_irs(params, ratio):
    split = PowerSplit.from_ratio(params, ratio)
    assert coverage_far(params, split, THETA_15).value > coverage_near(params, split).value


def test_uav_improves_far_user(params):
    split = PowerSplit.from_ratio(params, 0.5)
    assert coverage_far(params, split, THETA_15).value > coverage_far_without_uav(params, split).value


def test_far_coverage_without_uav_closed_form(params):
    split = PowerSplit(10.0, 20.0)
    assert coverage_far_without_uav(params, split).value == pytest.approx(h(2.0 / 3.0, 1.0), rel=1e-10)


def test_coverage_value_range_is_enforced():
    with pytest.raises(CoverageRangeError):
        CoverageValue(1.5, NomaRegime.NEAR_SIC)
    with pytest.raises(CoverageRangeError):
        CoverageValue(-0.01, NomaRegime.FAR_SIC)
    with pytest.raises(CoverageRangeError):
        CoverageValue(1.0 + 1e-7, NomaRegime.FAR_SIC)


@pytest.mark.parametrize("beta,threshold", [(0.5, 2.0), (1.0, 3.0), (1e-12, 1.0)])
def test_optimal_power_policy(beta, threshold):
    policy = optimal_power_policy(NetworkParams(sir_threshold=beta))
    assert policy.near_threshold_ratio == pytest.approx(threshold)
    assert policy.far_threshold_ratio == pytest.approx(threshold)
    assert policy.recommended == "near"


def test_elevation_upper_bound(params):
    assert math.degrees(elevation_upper_bound(params)) == pytest.approx(57.12, abs=0.01)
    assert elevation_upper_bound(NetworkParams(los_enhancement=1.0)) == 0.0
    eight = NetworkParams(los_enhancement=8.0, pathloss_exponent=4.0)
    assert math.degrees(elevation_upper_bound(eight)) == pytest.approx(math.degrees(math.acos(8 ** -0.5)))
    assert math.degrees(elevation_upper_bound(eight)) == pytest.approx(69.30, abs=0.01)


def reference_far_term(x, tau, order):
    """a_order of t**order * h(t) at tau from mpmath's numerical derivative.

    Psi(x, 1/t) = t**-x * pi*x/sin(pi*x) - 2F1(1, x; 1+x; -t).
    """
    with mp.workdps(50):
        x = mp.mpf(x)

        def f(t):
            g = t ** (-x) * mp.pi * x / mp.sin(mp.pi * x) - mp.hyp2f1(1, x, 1 + x, -t)
            return t ** order * 2 / ((1 + g) * (2 + g))

        return float(mp.diff(f, mp.mpf(tau), order) / mp.factorial(order))


@pytest.mark.parametrize("irs_elements", [4, 5, 12])
@pytest.mark.parametrize("tau", [0.5, 1.3, 4.0])
def test_far_term_matches_high_order_derivative(irs_elements, tau):
    order = irs_elements - 1
    expected = reference_far_term(2.0 / 3.0, tau, order)
    assert _far_term(2.0 / 3.0, tau, order, DEFAULT_QUADRATURE) == pytest.approx(expected, rel=1e-7, abs=1e-9)


@pytest.mark.parametrize("irs_elements", [33, 36, 41, 48, 64])
def test_far_coverage_stays_in_unit_interval_for_large_irs(irs_elements):
    sized = NetworkParams(irs_elements=irs_elements)
    split = PowerSplit(20.0, 10.0)
    for angle in range(1, 57):
        value = coverage_far(sized, split, ElevationModel.deterministic(math.radians(angle))).value
        assert -1e-12 <= value <= 1.0 + 1e-12, (irs_elements, angle, value)


def test_range_slack_is_far_below_coverage_resolution():
    assert RANGE_SLACK <= 1e-9


def test_weight_modes_at_reference_point(params):
    split = PowerSplit(20.0, 10.0)
    assert coverage_far(params, split, THETA_15, weight_mode="binomial").value == pytest.approx(0.9953, abs=5e-4)
    assert coverage_far(params, split, THETA_15, weight_mode="paper_literal").value == pytest.approx(0.9408, abs=5e-4)
