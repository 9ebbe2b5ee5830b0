"""Exception types raised by the analytic and simulation code."""
from __future__ import annotations

from typing import Optional


class NomaError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(NomaError, ValueError):
    """
    An argument lies outside the domain of the operation.

    Attributes:
        field (str): Name of the offending field of a value type, when known.
    """

    def __init__(self, message: str, field: str = ""):
        self.field = field
        super().__init__(message)


class QuadratureError(NomaError, ArithmeticError):
    """Adaptive quadrature did not reach its tolerance within the subdivision budget."""


class SeriesError(NomaError, ValueError):
    """Invalid truncated-series operation (center/order mismatch, zero constant term, ...)."""


class CoverageRangeError(NomaError, ArithmeticError):
    """A closed-form coverage value fell outside [0, 1]."""


class InsufficientWindowError(NomaError, ValueError):
    """The simulation window holds too few base stations for reliable statistics."""


class AcceptanceError(NomaError):
    """Analytic and Monte Carlo results disagree beyond the configured tolerance."""


class ConfigError(NomaError):
    """
    Invalid experiment configuration.

    Attributes:
        field (str): Dotted path of the offending entry, e.g. ``network.pathloss_exponent``.
        line (Optional[int]): 1-based line in the source file, when known.
    """

    def __init__(self, message: str, field: str = "", line: Optional[int] = None):
        self.message = message
        self.field = field
        self.line = line
        location = field
        if line is not None:
            location = f"line {line}" + (f", {field}" if field else "")
        super().__init__(f"{location}: {message}" if location else message)
