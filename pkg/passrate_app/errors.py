"""
Exception hierarchy for the toolkit.
Every error derives from PassRateError and from the builtin it specialises.
"""
from typing import Optional


class PassRateError(Exception):
    """Base class for all data and processing errors."""


class DatasetFormatError(PassRateError, ValueError):
    """A row of the enrollment table could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class UnknownCourseError(DatasetFormatError):
    """Course code outside the known catalogue."""


class OutOfRangeError(PassRateError, ValueError):
    """A value lies outside its admissible range."""


class EmptyInputError(PassRateError, ValueError):
    """An operation received no data where some is required."""


class DimensionMismatchError(PassRateError, ValueError):
    """Matrix or vector shapes are not conformable."""


class SumConditionError(PassRateError, ValueError):
    """Segment populations and section capacities do not add up to the same N."""


class UndefinedCorrelationError(PassRateError, ValueError):
    """Correlation requested for a variable with zero variance or a single class."""


class UnresolvableBaselineError(PassRateError, ValueError):
    """No observation at all is available to estimate a group baseline."""


class UnknownInstructorError(PassRateError, KeyError):
    """Instructor without a performance profile."""


class EmptyTermError(PassRateError, ValueError):
    """The requested term has no completed registrations."""


class ZeroBaselineError(PassRateError, ZeroDivisionError):
    """Relative enhancement against a zero baseline."""


class InfeasiblePlanError(PassRateError, ValueError):
    """Section plan cannot hold the enrollment (fewer students than sections)."""


class InsufficientInstructorsError(PassRateError, ValueError):
    """Instructor pool smaller than the number of sections to staff."""


class SolverError(PassRateError, RuntimeError):
    """The optimization backend did not report an optimal solution."""


class OptimalityCertificateError(SolverError):
    """Primal assignment value does not match its dual bound."""
