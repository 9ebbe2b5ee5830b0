"""
This module provides the trial-level Monte Carlo engines that check the closed forms:
the near-user and far-user SIR experiments and the association-count experiment.

Trials are grouped in fixed-size blocks. Block b of an engine draws all of its
randomness from Philox(SeedSequence(seed, spawn_key=(engine, b))), so the success count
of a run depends only on the seed and the parameters, never on how many worker
processes were used or in which order blocks finished.

Interfering BSs are drawn in the annulus between the user's exclusion radius and
r_max = factor / sqrt(pi * lambda_B). By default the mean interference of the region
beyond r_max is added back to every trial.
"""
from __future__ import annotations

import math
import logging
from dataclasses import dataclass
from functools import partial
from typing import Optional

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree

from .association import association_log_score
from .errors import DomainError, InsufficientWindowError
from .network_model import ElevationModel, NetworkParams, PowerSplit, sample_hppp_annulus, sample_los_factors
from ..utils.workers import Worker

logger = logging.getLogger(__name__)

NEAR_ENGINE = 1
FAR_ENGINE = 2
ASSOC_ENGINE = 3

# Interior BSs lie within this fraction of the window radius.
INTERIOR_FRACTION = 0.8
MIN_INTERIOR_BSS = 100
AUTO_INTERIOR_BSS = 200
TRUNCATION_WARN_RATIO = 1e-4
# UAV rows scored against all BSs at once.
UAV_CHUNK = 512


@dataclass(frozen=True)
class SimConfig:
    """
    Monte Carlo settings.

    Attributes:
        trials (int): Number of trials (window realizations for association counts).
        seed (int): 64-bit master seed.
        interference_radius_factor (float): r_max in units of 1/sqrt(pi*lambda_B), >= 10.
        ci_level (float): Confidence level of the reported interval.
        include_direct_far_path (bool): Add the direct BS-to-far-user path to the far-user signal.
        far_field_correction (bool): Add the mean interference from beyond r_max.
        block_size (int): Trials per RNG block.
        workers (int): Worker processes.
    """

    trials: int = 40000
    seed: int = 20240501
    interference_radius_factor: float = 30.0
    ci_level: float = 0.95
    include_direct_far_path: bool = True
    far_field_correction: bool = True
    block_size: int = 1024
    workers: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}", field="trials")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}", field="seed")
        if self.interference_radius_factor < 10:
            raise DomainError(
                f"interference_radius_factor must be >= 10, got {self.interference_radius_factor}",
                field="interference_radius_factor",
            )
        if not 0.0 < self.ci_level < 1.0:
            raise DomainError(f"ci_level must lie in (0, 1), got {self.ci_level}", field="ci_level")
        if self.block_size < 1:
            raise DomainError(f"block_size must be >= 1, got {self.block_size}", field="block_size")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}", field="workers")

    def blocks(self) -> list[tuple[int, int]]:
        """(block index, trials in block) for every block."""
        full, rest = divmod(self.trials, self.block_size)
        jobs = [(b, self.block_size) for b in range(full)]
        if rest:
            jobs.append((full, rest))
        return jobs

    def interference_radius(self, params: NetworkParams) -> float:
        return self.interference_radius_factor / math.sqrt(math.pi * params.bs_density)


@dataclass(frozen=True)
class CoverageEstimate:
    """
    Empirical coverage with a normal-approximation binomial confidence interval.

    Attributes:
        value (float): successes / trials.
        half_width (float): Half-width of the interval at the configured level.
        trials (int): Number of trials.
        successes (int): Number of trials with SIR >= beta.
    """

    value: float
    half_width: float
    trials: int
    successes: int

    @classmethod
    def from_counts(cls, successes: int, trials: int, ci_level: float = 0.95) -> "CoverageEstimate":
        if trials < 1 or not 0 <= successes <= trials:
            raise DomainError(f"Invalid counts: {successes} successes in {trials} trials")
        p = successes / trials
        z = float(stats.norm.ppf(0.5 + ci_level / 2.0))
        return cls(p, z * math.sqrt(p * (1.0 - p) / trials), trials, successes)


@dataclass(frozen=True)
class AssociationCounts:
    """
    Per-BS counts pooled over all window realizations.

    Attributes:
        user_counts (np.ndarray): Users attached to each interior BS.
        uav_counts (np.ndarray): UAVs attached to each interior BS.
        window_radius (float): Radius of the simulation disk (m).
    """

    user_counts: np.ndarray
    uav_counts: np.ndarray
    window_radius: float

    @property
    def interior_bss(self) -> int:
        return int(self.user_counts.size)

    def histogram(self, kind: str) -> np.ndarray:
        """np.bincount of the "users" or "uavs" counts."""
        if kind == "users":
            return np.bincount(self.user_counts)
        if kind == "uavs":
            return np.bincount(self.uav_counts)
        raise DomainError(f"Unknown count kind {kind!r}")


def block_rng(seed: int, engine: int, block: int) -> np.random.Generator:
    """Counter-based stream for one block of one engine."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(engine, block))))


def omitted_interference(params: NetworkParams, radius: np.ndarray | float) -> np.ndarray | float:
    """Mean interference of all BSs beyond `radius`, 2*pi*lambda_B*P*radius**(2-alpha)/(alpha-2)."""
    alpha = params.pathloss_exponent
    return (
        2.0 * math.pi * params.bs_density * params.tx_power_watts * np.power(radius, 2.0 - alpha) / (alpha - 2.0)
    )


def truncation_ratio(params: NetworkParams, sim: SimConfig) -> float:
    """
    Interference omitted beyond r_max relative to the median near-user signal scaled by 1/beta.

    A warning is logged when the ratio exceeds 1e-4. With `far_field_correction` on the
    omitted mean is added back, so a large ratio only affects the interference variance.
    """
    omitted = float(omitted_interference(params, sim.interference_radius(params)))
    median_r2 = math.log(2.0) / (math.pi * params.bs_density)
    median_signal = params.tx_power_watts * median_r2 ** (-params.pathloss_exponent / 2.0)
    ratio = omitted * params.sir_threshold / median_signal
    if ratio > TRUNCATION_WARN_RATIO:
        correction = "added back as its mean" if sim.far_field_correction else "ignored"
        logger.warning(
            f"Interference beyond r_max is {ratio:.3e} of the threshold-scaled median signal "
            f"(limit {TRUNCATION_WARN_RATIO:.0e}); it is {correction}."
        )
    else:
        logger.debug(f"Truncation ratio {ratio:.3e}")
    return ratio


def _interference(
    params: NetworkParams, sim: SimConfig, exclusion: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Aggregate interference for each trial, excluding the disk of radius `exclusion`."""
    n = exclusion.size
    r_max = sim.interference_radius(params)
    inner_sq = exclusion ** 2
    span = np.maximum(r_max ** 2 - inner_sq, 0.0)
    counts = rng.poisson(params.bs_density * math.pi * span)
    owner = np.repeat(np.arange(n), counts)
    dist_sq = inner_sq[owner] + rng.random(owner.size) * span[owner]
    fading = rng.exponential(size=owner.size)
    power = params.tx_power_watts * fading * dist_sq ** (-params.pathloss_exponent / 2.0)
    total = np.bincount(owner, weights=power, minlength=n)
    if sim.far_field_correction:
        total = total + omitted_interference(params, np.maximum(exclusion, r_max))
    return total


def _succeeds(signal: np.ndarray, disturbance: np.ndarray, beta: float) -> int:
    return int(np.count_nonzero((signal > 0.0) & (signal >= beta * disturbance)))


def _near_block(job: tuple[int, int], params: NetworkParams, split: PowerSplit, sim: SimConfig) -> int:
    block, n = job
    rng = block_rng(sim.seed, NEAR_ENGINE, block)
    dist_sq = rng.exponential(scale=1.0 / (math.pi * params.bs_density), size=n)
    gain = rng.exponential(size=n) * dist_sq ** (-params.pathloss_exponent / 2.0)
    interference = _interference(params, sim, np.sqrt(dist_sq), rng)
    intra = split.p_far * gain if split.p_far < split.p_near else 0.0
    return _succeeds(split.p_near * gain, intra + interference, params.sir_threshold)


def _far_block(
    job: tuple[int, int],
    params: NetworkParams,
    split: PowerSplit,
    elevation: ElevationModel,
    sim: SimConfig,
    reflected: bool,
) -> int:
    block, n = job
    rng = block_rng(sim.seed, FAR_ENGINE, block)
    alpha = params.pathloss_exponent
    scale = 1.0 / (math.pi * params.bs_density)
    dist_sq = np.maximum(rng.exponential(scale=scale, size=n), rng.exponential(scale=scale, size=n))
    distance = np.sqrt(dist_sq)
    theta = elevation.sample(rng, n)
    los_in = sample_los_factors(theta, params, rng)
    los_out = sample_los_factors(theta, params, rng)
    array_gain = rng.exponential(size=(n, params.irs_elements)).sum(axis=1)
    direct = rng.exponential(size=n) * dist_sq ** (-alpha / 2.0)
    interference = _interference(params, sim, distance, rng)

    channel = np.zeros(n)
    if reflected:
        channel += array_gain * los_in * los_out * (distance / np.cos(theta)) ** (-alpha)
    if sim.include_direct_far_path or not reflected:
        channel += direct
    intra = split.p_near * channel if split.p_near < split.p_far else 0.0
    return _succeeds(split.p_far * channel, intra + interference, params.sir_threshold)


def _run_blocks(func, sim: SimConfig, label: str) -> CoverageEstimate:
    jobs = sim.blocks()

    def progress(idx: int, total: int, item: tuple[int, int]) -> None:
        logger.debug(f"{label}: block {idx}/{total} done")

    logger.info(f"{label}: {sim.trials} trials in {len(jobs)} blocks on {sim.workers} process(es)")
    successes = sum(Worker(func, jobs, processes=sim.workers, progress=progress).run())
    estimate = CoverageEstimate.from_counts(successes, sim.trials, sim.ci_level)
    logger.info(f"{label}: {estimate.value:.5f} +/- {estimate.half_width:.5f}")
    return estimate


def simulate_near_coverage(params: NetworkParams, split: PowerSplit, sim: SimConfig) -> CoverageEstimate:
    """
    Estimates c_n.

    Per trial the serving distance satisfies ||U_n||**2 ~ Exp(pi*lambda_B). The
    intra-cell term P_f * G * ||U_n||**-alpha is present when P_f < P_n and cancelled
    otherwise. A trial succeeds when the signal is positive and SIR >= beta.

    Args:
        params (NetworkParams): Network parameters.
        split (PowerSplit): Power pair.
        sim (SimConfig): Monte Carlo settings.

    Returns:
        CoverageEstimate: The estimate with its confidence interval.
    """
    split.check_total(params)
    func = partial(_near_block, params=params, split=split, sim=sim)
    return _run_blocks(func, sim, "near-user engine")


def simulate_far_coverage(
    params: NetworkParams,
    split: PowerSplit,
    elevation: ElevationModel,
    sim: SimConfig,
    reflected: bool = True,
) -> CoverageEstimate:
    """
    Estimates c_f.

    ||U_f||**2 is the larger of two Exp(pi*lambda_B) draws. The reflected channel is
    H * L_in * L_out * (sec(Theta) * ||U_f||)**-alpha with H the sum of R unit
    exponentials and the two LoS factors drawn independently at the same Theta. The
    direct path G * ||U_f||**-alpha is added when `sim.include_direct_far_path` is set.
    With `reflected=False` only the direct path is used. The intra-cell term is present
    when P_n < P_f.

    Args:
        params (NetworkParams): Network parameters.
        split (PowerSplit): Power pair.
        elevation (ElevationModel): Distribution of Theta.
        sim (SimConfig): Monte Carlo settings.
        reflected (bool): Include the UAV-IRS path. Defaults to True.

    Returns:
        CoverageEstimate: The estimate with its confidence interval.
    """
    split.check_total(params)
    func = partial(_far_block, params=params, split=split, elevation=elevation, sim=sim, reflected=reflected)
    return _run_blocks(func, sim, "far-user engine" if reflected else "far-user direct-path engine")


def auto_window_radius(params: NetworkParams) -> float:
    """Window radius whose interior region holds 200 BSs on average."""
    return math.sqrt(AUTO_INTERIOR_BSS / (math.pi * params.bs_density)) / INTERIOR_FRACTION


def _assoc_realization(
    trial: int,
    params: NetworkParams,
    elevation: ElevationModel,
    window_radius: float,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    rng = block_rng(seed, ASSOC_ENGINE, trial)
    bss = sample_hppp_annulus(params.bs_density, 0.0, window_radius, rng)
    users = sample_hppp_annulus(params.user_density, 0.0, window_radius, rng)
    uavs = sample_hppp_annulus(params.uav_density, 0.0, window_radius, rng)
    if len(bss) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)

    user_owner = cKDTree(bss).query(users)[1] if len(users) else np.zeros(0, dtype=np.int64)
    user_counts = np.bincount(user_owner, minlength=len(bss))

    uav_owner = np.zeros(len(uavs), dtype=np.int64)
    for start in range(0, len(uavs), UAV_CHUNK):
        chunk = uavs[start : start + UAV_CHUNK]
        distance = np.linalg.norm(chunk[:, None, :] - bss[None, :, :], axis=2)
        theta = elevation.sample(rng, distance.size).reshape(distance.shape)
        los = sample_los_factors(theta, params, rng)
        scores = association_log_score(los, theta, distance, params.pathloss_exponent)
        uav_owner[start : start + len(chunk)] = np.argmax(scores, axis=1)
    uav_counts = np.bincount(uav_owner, minlength=len(bss))

    interior = np.hypot(bss[:, 0], bss[:, 1]) <= INTERIOR_FRACTION * window_radius
    return user_counts[interior], uav_counts[interior]


def simulate_association_counts(
    params: NetworkParams,
    elevation: ElevationModel,
    window_radius: Optional[float],
    sim: SimConfig,
) -> AssociationCounts:
    """
    Samples BSs, users and UAV projections in a disk and counts attachments per interior BS.

    Users attach to the nearest BS. Each UAV draws an independent (Theta_ij, L_ij) per
    candidate BS and attaches by the biased rule. Only BSs within 80% of the window
    radius are counted. `sim.trials` independent windows are pooled.

    Args:
        params (NetworkParams): Network parameters.
        elevation (ElevationModel): Distribution of Theta_ij.
        window_radius (Optional[float]): Disk radius in metres; None picks a radius with
                                         200 interior BSs on average.
        sim (SimConfig): Trials, seed and workers.

    Returns:
        AssociationCounts: The pooled per-BS counts.

    Raises:
        InsufficientWindowError: If fewer than 100 interior BSs are expected.
    """
    radius = auto_window_radius(params) if window_radius is None else float(window_radius)
    expected = params.bs_density * math.pi * (INTERIOR_FRACTION * radius) ** 2
    if expected < MIN_INTERIOR_BSS:
        raise InsufficientWindowError(
            f"Window radius {radius:.1f} m holds {expected:.1f} interior BSs on average; "
            f"at least {MIN_INTERIOR_BSS} are needed"
        )
    logger.info(f"Association engine: {sim.trials} windows of radius {radius:.1f} m (~{expected:.0f} interior BSs each)")
    func = partial(_assoc_realization, params=params, elevation=elevation, window_radius=radius, seed=sim.seed)
    results = Worker(func, range(sim.trials), processes=sim.workers).run()
    users = np.concatenate([r[0] for r in results]).astype(np.int64)
    uavs = np.concatenate([r[1] for r in results]).astype(np.int64)
    return AssociationCounts(users, uavs, radius)
