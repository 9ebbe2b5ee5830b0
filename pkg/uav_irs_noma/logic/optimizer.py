"""
Scalar maximization on an interval: a golden-section search and a grid-then-golden
strategy for objectives that are not known to be unimodal, used to pick the UAV
elevation angle that maximizes the far-user coverage.
"""
from __future__ import annotations

import math
import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional

import numpy as np

from .coverage import WeightMode, coverage_far, elevation_upper_bound
from .errors import DomainError
from .network_model import ElevationModel, NetworkParams, PowerSplit
from .special_math import DEFAULT_QUADRATURE, QuadratureSpec
from ..utils.workers import Worker

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ElevationOptimum:
    """
    Result of `optimize_elevation`.

    Attributes:
        theta (float): Maximizing elevation angle (radians).
        coverage (float): c_f at `theta`.
        upper_bound (float): The feasibility bound arccos(eta**(-2/alpha)) (radians).
        trace (list[tuple[float, float]]): Grid points (theta, c_f) of the coarse scan.
    """

    theta: float
    coverage: float
    upper_bound: float
    trace: list[tuple[float, float]] = field(default_factory=list)

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta)


def golden_section_maximize(f: Callable[[float], float], a: float, b: float, tol: float = 1e-5) -> tuple[float, float]:
    """
    Golden-section search for a maximum of a unimodal `f` on [a, b].

    Returns:
        tuple[float, float]: (x, f(x)) with the bracket narrowed below `tol`.
    """
    if b < a:
        a, b = b, a
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        # ties keep the left part so the smaller argument wins
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def grid_golden_maximize(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    grid_points: int = 181,
    tol: float = 1e-5,
    evaluate: Optional[Callable[[list[float]], list[float]]] = None,
) -> tuple[float, float, list[tuple[float, float]]]:
    """
    Global grid scan followed by golden-section refinement inside the bracket around
    the best grid point.

    Args:
        f (Callable[[float], float]): Objective.
        lo (float): Lower end of the search interval.
        hi (float): Upper end of the search interval.
        grid_points (int): Number of grid points, >= 2.
        tol (float): Final bracket width.
        evaluate (Optional[Callable]): Evaluates `f` on a list of points, e.g. in parallel.
                                       Defaults to a plain loop.

    Returns:
        tuple: (x*, f(x*), grid trace). Ties go to the smaller x.
    """
    if grid_points < 2:
        raise DomainError(f"grid_points must be >= 2, got {grid_points}")
    if not lo < hi:
        raise DomainError(f"Empty search interval [{lo}, {hi}]")
    grid = [float(v) for v in np.linspace(lo, hi, grid_points)]
    values = evaluate(grid) if evaluate is not None else [f(v) for v in grid]
    trace = list(zip(grid, values))
    best = int(np.argmax(values))
    left = grid[max(best - 1, 0)]
    right = grid[min(best + 1, grid_points - 1)]
    x, fx = golden_section_maximize(f, left, right, tol)
    if values[best] > fx or (values[best] == fx and grid[best] < x):
        x, fx = grid[best], values[best]
    logger.debug(f"Grid best {grid[best]:.6f} -> refined {x:.6f} (value {fx:.6f})")
    return x, fx, trace


def _coverage_at(
    theta: float,
    params: NetworkParams,
    split: PowerSplit,
    q: QuadratureSpec,
    weight_mode: WeightMode,
) -> float:
    return coverage_far(params, split, ElevationModel.deterministic(theta), q, weight_mode).value


def optimize_elevation(
    params: NetworkParams,
    split: PowerSplit,
    q: QuadratureSpec = DEFAULT_QUADRATURE,
    weight_mode: WeightMode | str = WeightMode.BINOMIAL,
    grid_points: int = 181,
    resolution_deg: float = 0.01,
    workers: int = 1,
) -> ElevationOptimum:
    """
    Maximizes c_f over deterministic elevation angles inside (0, arccos(eta**(-2/alpha))).

    Args:
        params (NetworkParams): Network parameters.
        split (PowerSplit): Power pair.
        q (QuadratureSpec): Tolerance settings.
        weight_mode (WeightMode | str): LoS-hop weights.
        grid_points (int): Coarse grid size. Defaults to 181.
        resolution_deg (float): Refinement resolution in degrees. Defaults to 0.01.
        workers (int): Processes used for the grid scan.

    Returns:
        ElevationOptimum: The maximizer, its coverage, the bound and the grid trace.

    Raises:
        DomainError: If the feasible interval is empty (eta = 1).
    """
    bound = elevation_upper_bound(params)
    eps = math.radians(resolution_deg)
    if bound <= 2.0 * eps:
        raise DomainError(f"No feasible elevation interval: upper bound is {math.degrees(bound):.4f} deg")
    objective = partial(
        _coverage_at, params=params, split=split, q=q, weight_mode=WeightMode.parse(weight_mode)
    )

    def evaluate(points: list[float]) -> list[float]:
        return Worker(objective, points, processes=workers).run()

    theta, value, trace = grid_golden_maximize(objective, eps, bound - eps, grid_points, eps, evaluate)
    logger.info(
        f"Optimal elevation {math.degrees(theta):.2f} deg (c_f = {value:.4f}, "
        f"bound {math.degrees(bound):.2f} deg, R = {params.irs_elements})"
    )
    return ElevationOptimum(theta, value, bound, trace)
