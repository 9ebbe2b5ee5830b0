"""
This module provides the numeric kernels shared by the closed-form coverage results:
the interference functional Psi(x, y), an adaptive quadrature wrapper around
`scipy.integrate.quad`, and expectations over the UAV elevation angle.

Psi(x, y) = y**x * (pi*x/sin(pi*x) - integral_0^{y**-x} dz / (1 + z**(1/x)))

The integrand is bounded by 1 and smooth, so the integral is evaluated directly in z.
When y**-x exceeds 1 the complementary tail integral over [y**-x, inf) is used instead,
which avoids cancelling the constant against an almost equal head integral.
"""
from __future__ import annotations

import math
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np
from scipy import integrate as sp_integrate

from .errors import DomainError, QuadratureError

if TYPE_CHECKING:
    from .network_model import ElevationModel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Tolerance settings for adaptive quadrature.

    Attributes:
        abs_tol (float): Absolute error target. Defaults to 1e-10.
        max_subdivisions (int): Maximum number of interval bisections. Defaults to 60.
    """

    abs_tol: float = 1e-10
    max_subdivisions: int = 60

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}", field="abs_tol")
        if self.max_subdivisions < 1:
            raise DomainError(f"max_subdivisions must be >= 1, got {self.max_subdivisions}", field="max_subdivisions")


DEFAULT_QUADRATURE = QuadratureSpec()


def integrate(func: Callable[[float], float], a: float, b: float, q: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """
    Integrates `func` over [a, b] with adaptive Gauss-Kronrod quadrature.

    Args:
        func (Callable[[float], float]): The integrand.
        a (float): Lower limit.
        b (float): Upper limit, may be `math.inf`.
        q (QuadratureSpec): Tolerance settings.

    Returns:
        float: The integral.

    Raises:
        QuadratureError: If the error estimate is still above `q.abs_tol` once the
                         subdivision budget is exhausted.
    """
    with np.errstate(over="ignore"):
        result = sp_integrate.quad(
            func, a, b, epsabs=q.abs_tol, epsrel=0.0, limit=q.max_subdivisions, full_output=1
        )
    value, abserr = float(result[0]), float(result[1])
    if len(result) > 3:
        # QUADPACK flagged a problem; roundoff warnings with an error estimate inside
        # the tolerance are still usable.
        if abserr > q.abs_tol or not math.isfinite(value):
            raise QuadratureError(
                f"Quadrature over [{a}, {b}] did not converge (error estimate {abserr:.3e} "
                f"> {q.abs_tol:.1e} after {q.max_subdivisions} subdivisions): {result[3]}"
            )
        logger.debug(f"Quadrature over [{a}, {b}] accepted with warning: {result[3]}")
    return value


def _check_exponent(x: float) -> None:
    if not 0.0 < x < 1.0:
        raise DomainError(f"Psi exponent x must lie in (0, 1), got {x}")


def psi(x: float, y: float, q: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """
    Evaluates the interference functional Psi(x, y).

    Args:
        x (float): Exponent 2/alpha, strictly inside (0, 1).
        y (float): Non-negative argument; `math.inf` is accepted and returns `math.inf`.
        q (QuadratureSpec): Tolerance settings.

    Returns:
        float: Psi(x, y) >= 0.

    Raises:
        DomainError: If x is outside (0, 1) or y is negative/NaN.
        QuadratureError: If the integral does not converge.
    """
    _check_exponent(x)
    if math.isnan(y) or y < 0:
        raise DomainError(f"Psi argument y must be >= 0, got {y}")
    if y == 0.0:
        return 0.0
    if math.isinf(y):
        return math.inf

    inv_x = 1.0 / x

    def integrand(z: float) -> float:
        return 1.0 / (1.0 + np.power(z, inv_x))

    scale = y ** x
    upper = y ** (-x)
    if upper <= 1.0:
        full = math.pi * x / math.sin(math.pi * x)
        return scale * (full - integrate(integrand, 0.0, upper, q))
    return scale * integrate(integrand, upper, math.inf, q)


def expect_over_theta(
    f: Callable[[float], float],
    model: "ElevationModel",
    q: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """
    Computes E[f(Theta)] for the given elevation-angle distribution.

    A deterministic model returns f(theta). A uniform model integrates f against the
    uniform density; a zero-width interval is treated as deterministic.

    Args:
        f (Callable[[float], float]): Function of the angle in radians, bounded on (0, pi/2).
        model (ElevationModel): The elevation distribution.
        q (QuadratureSpec): Tolerance settings for the uniform case.

    Returns:
        float: The expectation.
    """
    if model.is_deterministic:
        return float(f(model.theta))
    lo, hi = model.theta_lo, model.theta_hi
    width = hi - lo
    if width <= 0.0:
        return float(f(lo))
    return integrate(f, lo, hi, q) / width
