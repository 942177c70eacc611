"""Exception hierarchy.

Input problems derive from :class:`InvalidInput` (CLI exit code 2), numerical
breakdowns from :class:`NumericalFailure` (exit code 4).
"""

from __future__ import annotations


class StochPumpError(Exception):
    pass


class InvalidInput(StochPumpError, ValueError):
    pass


class NumericalFailure(StochPumpError, ArithmeticError):
    pass


class Disconnected(InvalidInput):
    pass


class IndexOutOfRange(InvalidInput):
    pass


class DimensionMismatch(InvalidInput):
    pass


class ParseError(InvalidInput):
    pass


class ArityMismatch(InvalidInput):
    pass


class NotConserved(InvalidInput):
    pass


class NotZeroSum(InvalidInput):
    pass


class AmbiguousGrouping(InvalidInput):
    pass


class CountLimitExceeded(StochPumpError):
    pass


class RateOverflow(NumericalFailure, OverflowError):
    pass


class StepFailure(NumericalFailure):
    pass


class NearSingularMonodromy(NumericalFailure):
    pass


class RefinementLimit(NumericalFailure):
    pass


class Degenerate(NumericalFailure):
    pass


class NotRobust(StochPumpError):
    """A loop meets an essential cell (CLI exit code 3)."""

    def __init__(self, message: str, t: float | None = None, height=None):
        super().__init__(message)
        self.t = t
        self.height = height
