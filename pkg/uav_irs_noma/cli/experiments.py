"""
Experiment runners behind the CLI subcommands. Each runner turns an `ExperimentConfig`
into a `ResultTable`: analytic columns, Monte Carlo columns (left empty when the
simulation is disabled), run metadata and, when both are enabled, the list of points
where the two disagree by more than the CI half-width plus the acceptance tolerance.
"""
from __future__ import annotations

import math
import logging
from dataclasses import replace
from typing import Any, Optional

import numpy as np
import pandas as pd

from ..logic.association import association_weight_wb, pmf_uavs, pmf_users, total_variation
from ..logic.coverage import (
    coverage_far,
    coverage_far_without_uav,
    coverage_near,
    elevation_upper_bound,
    optimal_power_policy,
)
from ..logic.experiment_config import ExperimentConfig
from ..logic.montecarlo import (
    CoverageEstimate,
    simulate_association_counts,
    simulate_far_coverage,
    simulate_near_coverage,
    truncation_ratio,
)
from ..logic.network_model import ElevationModel
from ..logic.optimizer import optimize_elevation
from .emitters import ResultTable

logger = logging.getLogger(__name__)

# Optimal elevation angles (degrees) reported for the reference network with
# P_n = 2 P_f, listed next to the computed optima.
REFERENCE_OPTIMA_DEG = {8: 9.2, 16: 12.2, 32: 19.5}


def _base_metadata(cfg: ExperimentConfig, experiment: str) -> dict[str, Any]:
    params = cfg.network
    meta: dict[str, Any] = {
        "experiment": experiment,
        "seed": cfg.simulation.seed,
        "mode": cfg.mode,
        "weight_mode": cfg.weight_mode,
        "policy_threshold_ratio": optimal_power_policy(params).near_threshold_ratio,
        "elevation_bound_deg": round(math.degrees(elevation_upper_bound(params)), 6),
    }
    if cfg.montecarlo_enabled:
        meta["truncation_ratio"] = float(f"{truncation_ratio(params, cfg.simulation):.6e}")
    meta["config"] = cfg.to_dict()
    return meta


def _mc_columns(estimate: Optional[CoverageEstimate]) -> tuple[float, float]:
    if estimate is None:
        return math.nan, math.nan
    return estimate.value, estimate.half_width


def cross_check(frame: pd.DataFrame, tolerance: float) -> list[str]:
    """
    Compares every `<name>_analytic` column with its `<name>_mc` / `<name>_ci` partners.

    Returns:
        list[str]: One message per row where |analytic - mc| > ci + tolerance.
    """
    failures = []
    for column in frame.columns:
        if "_analytic" not in column:
            continue
        mc_col = column.replace("_analytic", "_mc")
        ci_col = column.replace("_analytic", "_ci")
        if mc_col not in frame or ci_col not in frame:
            continue
        gap = (frame[column] - frame[mc_col]).abs()
        bad = gap > frame[ci_col] + tolerance
        for index in frame.index[bad.fillna(False)]:
            failures.append(
                f"{column} row {index}: analytic {frame.at[index, column]:.4f} vs "
                f"mc {frame.at[index, mc_col]:.4f} (ci {frame.at[index, ci_col]:.4f}, tolerance {tolerance})"
            )
    return failures


def run_power_ratio_sweep(cfg: ExperimentConfig) -> ResultTable:
    """
    c_n and c_f against the power ratio P_n/P_f, one c_f column set per IRS size.

    The policy threshold 1 + 2*beta is inserted into the ratio grid.
    """
    params = cfg.network
    q = cfg.quadrature
    sim = cfg.simulation
    elevation = ElevationModel.deterministic(math.radians(cfg.power_sweep.theta_deg))
    threshold = optimal_power_policy(params).near_threshold_ratio
    ratios = sorted(set(cfg.power_sweep.ratios()) | {threshold})
    sizes = cfg.power_sweep.irs_elements
    logger.info(f"Power sweep: {len(ratios)} ratios, R in {list(sizes)}, mode {cfg.mode}")

    rows = []
    for ratio in ratios:
        split = cfg.split(ratio)
        row: dict[str, Any] = {"ratio": ratio, "p_near": split.p_near, "p_far": split.p_far}
        row["c_n_analytic"] = coverage_near(params, split, q).value if cfg.analytic_enabled else math.nan
        near_mc = simulate_near_coverage(params, split, sim) if cfg.montecarlo_enabled else None
        row["c_n_mc"], row["c_n_ci"] = _mc_columns(near_mc)
        row["c_f_no_uav_analytic"] = (
            coverage_far_without_uav(params, split, q).value if cfg.analytic_enabled else math.nan
        )
        direct_mc = (
            simulate_far_coverage(params, split, elevation, sim, reflected=False) if cfg.montecarlo_enabled else None
        )
        row["c_f_no_uav_mc"], row["c_f_no_uav_ci"] = _mc_columns(direct_mc)
        for size in sizes:
            sized = params.with_irs_elements(size)
            row[f"c_f_analytic_R{size}"] = (
                coverage_far(sized, split, elevation, q, cfg.weight_mode).value if cfg.analytic_enabled else math.nan
            )
            far_mc = simulate_far_coverage(sized, split, elevation, sim) if cfg.montecarlo_enabled else None
            row[f"c_f_mc_R{size}"], row[f"c_f_ci_R{size}"] = _mc_columns(far_mc)
        rows.append(row)
        logger.info(f"ratio {ratio:.4g} done")

    frame = pd.DataFrame(rows, columns=_power_columns(sizes))
    metadata = _base_metadata(cfg, "power-sweep")
    metadata["theta_deg"] = cfg.power_sweep.theta_deg
    suffix = "analytic" if cfg.analytic_enabled else "mc"
    y_columns = [f"c_n_{suffix}", f"c_f_no_uav_{suffix}"] + [
        f"c_f_{suffix}_R{size}" for size in sizes
    ]
    table = ResultTable(
        name="Coverage versus power ratio",
        frame=frame,
        metadata=metadata,
        x_column="ratio",
        y_columns=y_columns,
        markers={f"P_n/P_f = {threshold:g}": threshold},
        log_x=True,
    )
    if cfg.analytic_enabled and cfg.montecarlo_enabled:
        table.failures = cross_check(frame, cfg.acceptance_tolerance)
    return table


def _power_columns(sizes: tuple[int, ...]) -> list[str]:
    columns = [
        "ratio", "p_near", "p_far", "c_n_analytic", "c_n_mc", "c_n_ci",
        "c_f_no_uav_analytic", "c_f_no_uav_mc", "c_f_no_uav_ci",
    ]
    for size in sizes:
        columns += [f"c_f_analytic_R{size}", f"c_f_mc_R{size}", f"c_f_ci_R{size}"]
    return columns


def run_elevation_sweep(cfg: ExperimentConfig) -> ResultTable:
    """
    c_f against a deterministic elevation angle, one column set per IRS size.
    """
    params = cfg.network
    settings = cfg.elevation_sweep
    split = cfg.split(settings.split_ratio)
    angles = settings.angles_deg()
    bound_deg = math.degrees(elevation_upper_bound(params))
    logger.info(f"Elevation sweep: {len(angles)} angles, R in {list(settings.irs_elements)}")

    columns = ["theta_deg"]
    for size in settings.irs_elements:
        columns += [f"c_f_analytic_R{size}", f"c_f_mc_R{size}", f"c_f_ci_R{size}"]
    columns.append("elevation_bound_deg")

    rows = []
    for angle in angles:
        elevation = ElevationModel.deterministic(math.radians(angle))
        row: dict[str, Any] = {"theta_deg": angle, "elevation_bound_deg": bound_deg}
        for size in settings.irs_elements:
            sized = params.with_irs_elements(size)
            row[f"c_f_analytic_R{size}"] = (
                coverage_far(sized, split, elevation, cfg.quadrature, cfg.weight_mode).value
                if cfg.analytic_enabled
                else math.nan
            )
            estimate = simulate_far_coverage(sized, split, elevation, cfg.simulation) if cfg.montecarlo_enabled else None
            row[f"c_f_mc_R{size}"], row[f"c_f_ci_R{size}"] = _mc_columns(estimate)
        rows.append(row)
    frame = pd.DataFrame(rows, columns=columns)

    suffix = "analytic" if cfg.analytic_enabled else "mc"
    argmax = {}
    for size in settings.irs_elements:
        values = frame[f"c_f_{suffix}_R{size}"]
        argmax[size] = float(frame.at[int(values.to_numpy().argmax()), "theta_deg"]) if len(values) else None

    metadata = _base_metadata(cfg, "elevation-sweep")
    metadata["split"] = {"p_near": split.p_near, "p_far": split.p_far}
    metadata["argmax_theta_deg"] = argmax
    metadata["reference_optima_deg"] = {k: v for k, v in REFERENCE_OPTIMA_DEG.items() if k in settings.irs_elements}
    table = ResultTable(
        name="Far-user coverage versus elevation angle",
        frame=frame,
        metadata=metadata,
        x_column="theta_deg",
        y_columns=[f"c_f_{suffix}_R{size}" for size in settings.irs_elements],
        markers={f"bound {bound_deg:.2f} deg": bound_deg},
    )
    if cfg.analytic_enabled and cfg.montecarlo_enabled:
        table.failures = cross_check(frame, cfg.acceptance_tolerance)
    return table


def _empirical(counts: np.ndarray, size: int) -> np.ndarray:
    hist = np.bincount(np.minimum(counts, size), minlength=size + 1).astype(float)
    return hist[:size] / max(counts.size, 1)


def run_assoc_stats(cfg: ExperimentConfig) -> ResultTable:
    """
    Analytic and empirical PMFs of the user count M and the UAV count N per BS.
    """
    params = cfg.network
    settings = cfg.assoc_stats
    elevation = cfg.elevation_model()
    size = max(settings.m_max, settings.n_max) + 1
    users = pmf_users(params, size - 1)
    uavs = pmf_uavs(params, elevation, size - 1, cfg.quadrature, settings.wb_convention)
    w_b = association_weight_wb(params, elevation, cfg.quadrature, settings.wb_convention)

    data: dict[str, Any] = {
        "k": np.arange(size),
        "p_m_analytic": np.where(np.arange(size) <= settings.m_max, users.as_array(), math.nan),
        "p_m_empirical": np.full(size, math.nan),
        "p_n_analytic": np.where(np.arange(size) <= settings.n_max, uavs.as_array(), math.nan),
        "p_n_empirical": np.full(size, math.nan),
    }
    metadata = _base_metadata(cfg, "assoc-stats")
    metadata.update(
        {
            "w_b": w_b,
            "wb_convention": settings.wb_convention,
            "p_m0_analytic": users.probs[0],
            "p_n0_analytic": uavs.probs[0],
            "mean_m_analytic": users.mean(),
            "mean_n_analytic": uavs.mean(),
        }
    )
    failures = []
    if cfg.montecarlo_enabled:
        sim = replace(cfg.simulation, trials=settings.windows)
        counts = simulate_association_counts(params, elevation, settings.window_radius, sim)
        data["p_m_empirical"] = _empirical(counts.user_counts, size)
        data["p_n_empirical"] = _empirical(counts.uav_counts, size)
        tv_m = total_variation(pmf_users(params, settings.m_max), counts.user_counts)
        tv_n = total_variation(
            pmf_uavs(params, elevation, settings.n_max, cfg.quadrature, settings.wb_convention), counts.uav_counts
        )
        metadata.update(
            {
                "window_radius_m": counts.window_radius,
                "interior_bs_samples": counts.interior_bss,
                "tv_users": tv_m,
                "tv_uavs": tv_n,
                "p_m0_empirical": float(np.mean(counts.user_counts == 0)),
                "p_n0_empirical": float(np.mean(counts.uav_counts == 0)),
            }
        )
        logger.info(f"TV(M) = {tv_m:.4f}, TV(N) = {tv_n:.4f} over {counts.interior_bss} BSs")
        for label, tv in (("users", tv_m), ("uavs", tv_n)):
            if tv > cfg.acceptance_tolerance:
                failures.append(f"TV distance for {label} is {tv:.4f} > {cfg.acceptance_tolerance}")

    table = ResultTable(
        name="Association count PMFs",
        frame=pd.DataFrame(data),
        metadata=metadata,
        x_column="k",
        y_columns=["p_m_analytic", "p_m_empirical", "p_n_analytic", "p_n_empirical"],
        y_label="probability",
    )
    table.failures = failures
    return table


def run_optimize(cfg: ExperimentConfig) -> ResultTable:
    """
    Optimal deterministic elevation angle per IRS size; the table holds the grid trace.
    """
    params = cfg.network
    settings = cfg.optimizer
    split = cfg.split(settings.split_ratio)
    optima: dict[int, dict[str, float]] = {}
    trace_columns: dict[str, list[float]] = {}
    bound_deg = math.degrees(elevation_upper_bound(params))
    for size in settings.irs_elements:
        result = optimize_elevation(
            params.with_irs_elements(size),
            split,
            cfg.quadrature,
            cfg.weight_mode,
            settings.grid_points,
            settings.resolution_deg,
            cfg.simulation.workers,
        )
        optima[size] = {"theta_deg": round(result.theta_deg, 4), "c_f": result.coverage}
        trace_columns.setdefault("theta_deg", [math.degrees(t) for t, _ in result.trace])
        trace_columns[f"c_f_R{size}"] = [value for _, value in result.trace]

    metadata = _base_metadata(cfg, "optimize")
    metadata["split"] = {"p_near": split.p_near, "p_far": split.p_far}
    metadata["optima"] = optima
    metadata["reference_optima_deg"] = {k: v for k, v in REFERENCE_OPTIMA_DEG.items() if k in settings.irs_elements}
    return ResultTable(
        name="Elevation optimization grid",
        frame=pd.DataFrame(trace_columns),
        metadata=metadata,
        x_column="theta_deg",
        y_columns=[f"c_f_R{size}" for size in settings.irs_elements],
        markers={f"bound {bound_deg:.2f} deg": bound_deg},
    )


EXPERIMENTS = {
    "power-sweep": run_power_ratio_sweep,
    "elevation-sweep": run_elevation_sweep,
    "assoc-stats": run_assoc_stats,
    "optimize": run_optimize,
}
