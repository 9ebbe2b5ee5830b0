import logging
import math
from dataclasses import replace

import numpy as np
import pytest

from uav_irs_noma.logic.association import pmf_uavs, pmf_users, total_variation
from uav_irs_noma.logic.coverage import coverage_far, coverage_far_without_uav, coverage_near
from uav_irs_noma.logic.errors import DomainError, InsufficientWindowError
from uav_irs_noma.logic.montecarlo import (
    CoverageEstimate,
    SimConfig,
    block_rng,
    simulate_association_counts,
    simulate_far_coverage,
    simulate_near_coverage,
    truncation_ratio,
)
from uav_irs_noma.logic.network_model import ElevationModel, NetworkParams, PowerSplit

THETA_15 = ElevationModel.deterministic(math.radians(15.0))


@pytest.fixture
def params():
    return NetworkParams()


@pytest.fixture
def sim():
    return SimConfig(trials=20_000, seed=12345, block_size=2048)


def test_sim_config_blocks():
    assert SimConfig(trials=2500, block_size=1024).blocks() == [(0, 1024), (1, 1024), (2, 452)]
    with pytest.raises(DomainError):
        SimConfig(interference_radius_factor=5.0)
    with pytest.raises(DomainError):
        SimConfig(trials=0)


def test_block_streams_are_reproducible_and_distinct():
    a = block_rng(7, 1, 3).random(4)
    assert np.array_equal(a, block_rng(7, 1, 3).random(4))
    assert not np.array_equal(a, block_rng(7, 1, 4).random(4))
    assert not np.array_equal(a, block_rng(7, 2, 3).random(4))


def test_estimate_interval():
    estimate = CoverageEstimate.from_counts(50, 100)
    assert estimate.value == 0.5
    assert estimate.half_width == pytest.approx(1.959964 * 0.05, rel=1e-5)


def test_same_seed_same_counts_for_any_worker_count(params):
    split = PowerSplit(20.0, 10.0)
    base = SimConfig(trials=3000, seed=99, block_size=500)
    serial = simulate_near_coverage(params, split, base)
    again = simulate_near_coverage(params, split, base)
    assert serial.successes == again.successes
    far_serial = simulate_far_coverage(params, split, THETA_15, base)
    for workers in (4, 16):
        parallel = simulate_near_coverage(params, split, replace(base, workers=workers))
        far_parallel = simulate_far_coverage(params, split, THETA_15, replace(base, workers=workers))
        assert parallel.successes == serial.successes
        assert far_parallel.successes == far_serial.successes


def test_near_engine_tiny_threshold_always_succeeds():
    params = NetworkParams(sir_threshold=1e-12)
    estimate = simulate_near_coverage(params, PowerSplit(20.0, 10.0), SimConfig(trials=2000, seed=1))
    assert estimate.value == 1.0


def test_zero_power_never_succeeds(params):
    sim = SimConfig(trials=2000, seed=1)
    assert simulate_near_coverage(params, PowerSplit(0.0, 30.0), sim).value == 0.0
    assert simulate_far_coverage(params, PowerSplit(30.0, 0.0), THETA_15, sim).value == 0.0


def test_large_irs_covers_far_user():
    params = NetworkParams(irs_elements=256)
    estimate = simulate_far_coverage(
        params, PowerSplit(0.0, 30.0), ElevationModel.deterministic(math.radians(20.0)), SimConfig(trials=4000, seed=3)
    )
    assert estimate.value >= 0.99


@pytest.mark.parametrize("split", [PowerSplit(20.0, 10.0), PowerSplit(10.0, 20.0), PowerSplit(24.0, 6.0)])
def test_near_engine_matches_closed_form(params, sim, split):
    # (20, 10) keeps the intra-cell term, (10, 20) cancels it
    estimate = simulate_near_coverage(params, split, sim)
    analytic = coverage_near(params, split).value
    assert abs(estimate.value - analytic) <= estimate.half_width + 0.01


def test_far_engine_matches_closed_form_without_direct_path(params, sim):
    split = PowerSplit(20.0, 10.0)
    reflected_only = replace(sim, include_direct_far_path=False)
    estimate = simulate_far_coverage(params, split, THETA_15, reflected_only)
    analytic = coverage_far(params, split, THETA_15).value
    assert abs(estimate.value - analytic) <= estimate.half_width + 0.01


def test_far_engine_with_direct_path_matches_closed_form(params, sim):
    split = PowerSplit(20.0, 10.0)
    assert sim.include_direct_far_path
    estimate = simulate_far_coverage(params, split, THETA_15, sim)
    analytic = coverage_far(params, split, THETA_15).value
    assert abs(estimate.value - analytic) <= estimate.half_width + 0.01


def test_direct_path_engine_matches_no_uav_closed_form(params, sim):
    split = PowerSplit(10.0, 20.0)
    estimate = simulate_far_coverage(params, split, THETA_15, sim, reflected=False)
    analytic = coverage_far_without_uav(params, split).value
    assert abs(estimate.value - analytic) <= estimate.half_width + 0.01


def test_direct_path_only_helps(params, sim):
    split = PowerSplit(20.0, 10.0)
    with_direct = simulate_far_coverage(params, split, THETA_15, sim)
    without = simulate_far_coverage(params, split, THETA_15, replace(sim, include_direct_far_path=False))
    assert with_direct.successes >= without.successes


def test_half_width_shrinks_with_trials(params):
    split = PowerSplit(20.0, 10.0)
    small = simulate_near_coverage(params, split, SimConfig(trials=4000, seed=5))
    large = simulate_near_coverage(params, split, SimConfig(trials=16000, seed=5))
    assert large.half_width / small.half_width == pytest.approx(0.5, rel=0.2)


def test_truncation_ratio_is_reported(params, caplog):
    with caplog.at_level(logging.WARNING):
        ratio = truncation_ratio(params, SimConfig())
    assert ratio == pytest.approx(0.0192, rel=0.02)
    assert "beyond r_max" in caplog.text


def test_association_counts_without_uavs(params):
    sparse = NetworkParams(uav_density=1e-15)
    counts = simulate_association_counts(sparse, THETA_15, None, SimConfig(trials=2, seed=4))
    assert counts.interior_bss > 0
    assert np.all(counts.uav_counts == 0)
    assert counts.histogram("uavs").tolist() == [counts.interior_bss]


def test_association_window_must_be_large_enough(params):
    with pytest.raises(InsufficientWindowError):
        simulate_association_counts(params, THETA_15, 500.0, SimConfig(trials=1))


def test_association_counts_match_pmfs():
    params = NetworkParams(los_enhancement=1.0, user_density=3e-5, uav_density=3e-5)
    counts = simulate_association_counts(params, THETA_15, None, SimConfig(trials=40, seed=8))
    assert total_variation(pmf_users(params, 40), counts.user_counts) < 0.04
    assert total_variation(pmf_uavs(params, THETA_15, 40), counts.uav_counts) < 0.04
    assert counts.user_counts.mean() == pytest.approx(3.0, rel=0.1)


def test_association_counts_match_pmfs_for_reference_network(params):
    counts = simulate_association_counts(params, THETA_15, None, SimConfig(trials=300, seed=21))
    assert counts.interior_bss >= 300 * 100
    assert total_variation(pmf_users(params, 60), counts.user_counts) <= 0.02
    assert total_variation(pmf_uavs(params, THETA_15, 60), counts.uav_counts) <= 0.02
