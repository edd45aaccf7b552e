"""Exception hierarchy for btsgap."""

from __future__ import annotations


class BTSError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BTSError, ValueError):
    """An argument violates a precondition (non-finite, negative, a >= b, ...)."""


class AccuracyError(BTSError):
    """Quadrature could not reach the requested tolerance."""

    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (achieved error estimate {estimate:.3e})")
        self.estimate = estimate


class BracketError(BTSError):
    """The target value is not bracketed by the search interval."""


class ConvergenceError(BTSError):
    """An iterative solver exhausted its iteration budget."""


class SupersolutionError(BTSError):
    """The supplied upper end of an order interval is not a supersolution."""


class UnsupportedBranchError(BTSError):
    """The operation is only defined for one of the two coupling regimes."""


class ClassificationError(BTSError):
    """Phase classification failed because the scheme iteration did not converge."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class SearchRangeError(BTSError):
    """Both ends of a critical-beta search interval have the same phase."""
