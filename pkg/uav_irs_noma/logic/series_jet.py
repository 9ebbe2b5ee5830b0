"""
Truncated Taylor series ("jets") about a point and the arithmetic needed to take
the high-order t-derivative in the far-user coverage expression.

A jet stores a_0..a_K such that f(t) = sum_k a_k (t - center)**k + O((t - center)**(K+1)).
Coefficients are mpmath numbers carried at `SERIES_DPS` decimal digits. Reducing a
jet of order K to a coverage value sums alternating terms up to about 2**K times
larger than the result, which double precision cannot absorb beyond K ~ 30.
"""
from __future__ import annotations

import math
import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
from mpmath import mp, mpf

from .errors import DomainError, SeriesError
from .special_math import DEFAULT_QUADRATURE, QuadratureSpec, psi

logger = logging.getLogger(__name__)

# Highest supported order (IRS size R = MAX_SERIES_ORDER + 1).
MAX_SERIES_ORDER = 63

# Working precision of jet arithmetic. 2**63 is about 1e19, leaving ~40 digits at the cap.
SERIES_DPS = 60

Scalar = Union[float, int, mpf]


@dataclass(frozen=True)
class SeriesJet:
    """
    Truncated Taylor expansion about `center`.

    Attributes:
        center (float): Expansion point t0.
        terms (tuple): Taylor coefficients a_0..a_K as mpmath numbers.
    """

    center: float
    terms: tuple

    def __post_init__(self) -> None:
        if not self.terms:
            raise SeriesError("A jet needs at least one coefficient")
        if not math.isfinite(self.center) or self.center < 0:
            raise SeriesError(f"Jet center must be finite and >= 0, got {self.center}")
        with mp.workdps(SERIES_DPS):
            terms = tuple(mpf(c) for c in self.terms)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "center", float(self.center))

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    @property
    def coeffs(self) -> tuple[float, ...]:
        """The coefficients rounded to floats."""
        return tuple(float(c) for c in self.terms)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    def coefficient(self, k: int) -> float:
        """a_k rounded to a float."""
        if k < 0 or k > self.order:
            raise SeriesError(f"Coefficient index {k} outside [0, {self.order}]")
        return float(self.terms[k])

    @classmethod
    def constant(cls, value: Scalar, center: float, order: int) -> "SeriesJet":
        return cls(center, (value,) + (0,) * order)

    @classmethod
    def variable(cls, center: float, order: int) -> "SeriesJet":
        """The identity function t expanded about `center`."""
        return jet_shift_monomial(1, center, order)

    def _coerce(self, other: Union["SeriesJet", Scalar]) -> "SeriesJet":
        if isinstance(other, SeriesJet):
            _check_compatible(self, other)
            return other
        return SeriesJet.constant(other, self.center, self.order)

    def __add__(self, other: Union["SeriesJet", Scalar]) -> "SeriesJet":
        other = self._coerce(other)
        with mp.workdps(SERIES_DPS):
            return SeriesJet(self.center, tuple(a + b for a, b in zip(self.terms, other.terms)))

    __radd__ = __add__

    def __neg__(self) -> "SeriesJet":
        return SeriesJet(self.center, tuple(-a for a in self.terms))

    def __sub__(self, other: Union["SeriesJet", Scalar]) -> "SeriesJet":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Scalar) -> "SeriesJet":
        return (-self) + other

    def __mul__(self, other: Union["SeriesJet", Scalar]) -> "SeriesJet":
        return jet_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: Union["SeriesJet", Scalar]) -> "SeriesJet":
        if isinstance(other, SeriesJet):
            return jet_mul(self, jet_reciprocal(other))
        with mp.workdps(SERIES_DPS):
            divisor = mpf(other)
            return SeriesJet(self.center, tuple(a / divisor for a in self.terms))


def _check_compatible(a: SeriesJet, b: SeriesJet) -> None:
    if a.center != b.center:
        raise SeriesError(f"Jet centers differ: {a.center} vs {b.center}")
    if a.order != b.order:
        raise SeriesError(f"Jet orders differ: {a.order} vs {b.order}")


def _check_order(order: int) -> None:
    if order < 0 or order > MAX_SERIES_ORDER:
        raise SeriesError(f"Series order must lie in [0, {MAX_SERIES_ORDER}], got {order}")


def jet_mul(a: SeriesJet, b: Union[SeriesJet, Scalar]) -> SeriesJet:
    """
    Cauchy product of two jets (or scaling by a scalar), truncated to the shared order.
    """
    with mp.workdps(SERIES_DPS):
        if not isinstance(b, SeriesJet):
            factor = mpf(b)
            return SeriesJet(a.center, tuple(c * factor for c in a.terms))
        _check_compatible(a, b)
        product = tuple(mp.fdot(a.terms[: k + 1], b.terms[k::-1]) for k in range(a.order + 1))
        return SeriesJet(a.center, product)


def jet_reciprocal(a: SeriesJet) -> SeriesJet:
    """
    Series of 1/f from the series of f.

    Raises:
        SeriesError: If the constant term is zero.
    """
    coeffs = a.terms
    if coeffs[0] == 0:
        raise SeriesError("Cannot take the reciprocal of a jet with zero constant term")
    with mp.workdps(SERIES_DPS):
        out = [1 / coeffs[0]]
        for k in range(1, len(coeffs)):
            out.append(-mp.fdot(coeffs[1 : k + 1], out[::-1]) / coeffs[0])
        return SeriesJet(a.center, tuple(out))


def jet_shift_monomial(power: int, center: float, order: int) -> SeriesJet:
    """
    Expands t**power about `center` with the binomial theorem.

    Example:
        jet_shift_monomial(3, 2.0, 3).coeffs == (8.0, 12.0, 6.0, 1.0)
    """
    if power < 0:
        raise SeriesError(f"Monomial power must be >= 0, got {power}")
    with mp.workdps(SERIES_DPS):
        c = mpf(center)
        coeffs = tuple(mp.binomial(power, k) * c ** (power - k) if k <= power else mpf(0) for k in range(order + 1))
        return SeriesJet(center, coeffs)


def derivative_at(f_jet: SeriesJet, k: int) -> float:
    """
    Returns the k-th derivative at the expansion point, k! * a_k.

    Raises:
        SeriesError: If k is negative or above the jet order.
    """
    if k < 0 or k > f_jet.order:
        raise SeriesError(f"Derivative order {k} outside [0, {f_jet.order}]")
    with mp.workdps(SERIES_DPS):
        return float(mp.factorial(k) * f_jet.terms[k])


def psi_recip_jet(x: float, t0: float, order: int, q: QuadratureSpec = DEFAULT_QUADRATURE) -> SeriesJet:
    """
    Taylor expansion of g(t) = Psi(x, 1/t) about t0.

    g satisfies t*g'(t) = -x*(g(t) + 1/(1+t)). Matching powers of s = t - t0 gives

        a_{k+1} = -(x*(a_k + b_k) + k*a_k) / (t0*(k+1)),  b_k = (-1)**k / (1+t0)**(k+1),

    seeded with a_0 = Psi(x, 1/t0). The seed carries the quadrature error; the
    recurrence itself runs at `SERIES_DPS` digits.

    Args:
        x (float): Exponent 2/alpha in (0, 1).
        t0 (float): Expansion point, > 0.
        order (int): Highest coefficient index K.
        q (QuadratureSpec): Tolerance for the seed value.

    Returns:
        SeriesJet: The jet of g about t0.
    """
    if not t0 > 0 or not math.isfinite(t0):
        raise DomainError(f"Expansion point must be finite and > 0, got {t0}")
    _check_order(order)
    seed = psi(x, 1.0 / t0, q)
    with mp.workdps(SERIES_DPS):
        t, xx = mpf(t0), mpf(x)
        coeffs = [mpf(seed)]
        for k in range(order):
            b_k = (-1) ** k / (1 + t) ** (k + 1)
            coeffs.append(-(xx * (coeffs[k] + b_k) + k * coeffs[k]) / (t * (k + 1)))
        return SeriesJet(t0, tuple(coeffs))
