"""
Correlation diagnostics and confidence intervals.
Pearson and point-biserial coefficients, factor correlation tables, 95% intervals.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from passrate_app.config import CONFIDENCE_Z
from passrate_app.errors import EmptyInputError, UndefinedCorrelationError

logger = logging.getLogger(__name__)

# Quantitative factors of the registration table, in report order
QUANTITATIVE_FACTORS = (
    "section_capacity",
    "age",
    "academic_age",
    "enrolled_count",
    "grade",
    "cancellations",
    "attempts",
    "gpa",
)
BINARY_FACTORS = ("pass", "gender")


class CorrelationKind(str, Enum):
    PEARSON = "pearson"
    POINT_BISERIAL = "point_biserial"


class ConfidenceInterval(BaseModel):
    """Closed interval [lower, upper]; integer-valued intervals have integer endpoints."""
    model_config = ConfigDict(frozen=True)

    lower: float
    upper: float
    integer_valued: bool = False

    @model_validator(mode="after")
    def _check_bounds(self) -> "ConfidenceInterval":
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")
        if self.integer_valued and not (float(self.lower).is_integer() and float(self.upper).is_integer()):
            raise ValueError("integer-valued interval needs integer endpoints")
        return self

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True, eq=False)
class CorrelationReport:
    """Symmetric table of pairwise coefficients with the kind used for each pair."""
    variables: Tuple[str, ...]
    matrix: np.ndarray
    kinds: Dict[Tuple[str, str], CorrelationKind]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.matrix, index=list(self.variables), columns=list(self.variables))


def _vector(values: Iterable[float], name: str) -> np.ndarray:
    array = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    if array.ndim != 1:
        raise UndefinedCorrelationError(f"{name} must be a vector")
    return array


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Product-moment correlation coefficient.

    Raises:
        UndefinedCorrelationError: On unequal lengths, fewer than 2 points or zero variance
    """
    x = _vector(x, "x")
    y = _vector(y, "y")
    if x.size != y.size or x.size < 2:
        raise UndefinedCorrelationError(f"need two equal-length vectors of size >= 2, got {x.size} and {y.size}")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise UndefinedCorrelationError("correlation undefined for a zero-variance variable")

    dx = x - x.mean()
    dy = y - y.mean()
    r = float(np.dot(dx, dy) / math.sqrt(np.dot(dx, dx) * np.dot(dy, dy)))
    return max(-1.0, min(1.0, r))


def point_biserial(binary: Sequence[float], y: Sequence[float]) -> float:
    """
    Point-biserial coefficient (M1 - M0) / sigma * sqrt(N1 N0 / N^2).

    sigma is the population standard deviation of y.

    Raises:
        UndefinedCorrelationError: If `binary` is not 0/1, holds a single class, or y is constant
    """
    b = _vector(binary, "binary")
    y = _vector(y, "y")
    if b.size != y.size or b.size < 2:
        raise UndefinedCorrelationError(f"need two equal-length vectors of size >= 2, got {b.size} and {y.size}")
    if not np.all((b == 0) | (b == 1)):
        raise UndefinedCorrelationError("binary variable must take values 0 and 1 only")

    ones = b == 1
    n1 = int(ones.sum())
    n0 = b.size - n1
    if n1 == 0 or n0 == 0:
        raise UndefinedCorrelationError("binary variable has a single class")
    if np.ptp(y) == 0:
        raise UndefinedCorrelationError("correlation undefined for a zero-variance variable")

    sigma = float(np.std(y))
    n = b.size
    r = (y[ones].mean() - y[~ones].mean()) / sigma * math.sqrt(n1 * n0 / n**2)
    return max(-1.0, min(1.0, float(r)))


def confidence_interval(
    samples: Sequence[float],
    integer_valued: bool = False,
    lower_bound: Optional[float] = None,
    upper_bound: Optional[float] = None,
) -> ConfidenceInterval:
    """
    95 percent confidence interval of the mean: x_bar -/+ 1.96 sigma / sqrt(n).

    Args:
        samples: Observations (n >= 2)
        integer_valued: Apply floor to the lower and ceiling to the upper endpoint
        lower_bound: Optional clamp for nonnegative quantities
        upper_bound: Optional clamp for frequencies

    Returns:
        ConfidenceInterval

    Raises:
        EmptyInputError: If fewer than two samples are given
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise EmptyInputError(f"confidence interval needs at least 2 samples, got {x.size}")

    mean = float(x.mean())
    half_width = CONFIDENCE_Z * float(np.std(x)) / math.sqrt(x.size)
    lower, upper = mean - half_width, mean + half_width
    if integer_valued:
        lower, upper = float(math.floor(lower)), float(math.ceil(upper))
    if lower_bound is not None:
        lower, upper = max(lower, lower_bound), max(upper, lower_bound)
    if upper_bound is not None:
        lower, upper = min(lower, upper_bound), min(upper, upper_bound)
    return ConfidenceInterval(lower=lower, upper=upper, integer_valued=integer_valued)


def _is_binary(column: pd.Series) -> bool:
    return bool(column.isin([0, 1]).all())


def correlation_matrix(
    frame: pd.DataFrame,
    variables: Sequence[str] = QUANTITATIVE_FACTORS,
) -> CorrelationReport:
    """
    Pairwise correlation table over the selected factors.

    Pairs with exactly one 0/1 variable use the point-biserial coefficient,
    every other pair Pearson. Zero-variance variables are dropped with a warning.

    Raises:
        EmptyInputError: If fewer than two variables remain
    """
    kept = []
    for name in variables:
        column = frame[name].astype(float)
        if column.size < 2 or np.ptp(column.to_numpy()) == 0:
            logger.warning("Dropping zero-variance variable %s from the correlation table", name)
            continue
        kept.append(name)
    if len(kept) < 2:
        raise EmptyInputError("correlation table needs at least two non-constant variables")

    binary = {name: _is_binary(frame[name]) for name in kept}
    size = len(kept)
    matrix = np.eye(size)
    kinds: Dict[Tuple[str, str], CorrelationKind] = {}
    for i in range(size):
        for j in range(i + 1, size):
            a, b = kept[i], kept[j]
            if binary[a] != binary[b]:
                flag, other = (a, b) if binary[a] else (b, a)
                r = point_biserial(frame[flag].to_numpy(), frame[other].to_numpy())
                kind = CorrelationKind.POINT_BISERIAL
            else:
                r = pearson(frame[a].to_numpy(), frame[b].to_numpy())
                kind = CorrelationKind.PEARSON
            matrix[i, j] = matrix[j, i] = r
            kinds[(a, b)] = kinds[(b, a)] = kind
    return CorrelationReport(tuple(kept), matrix, kinds)


def binary_correlations(
    frame: pd.DataFrame,
    binary: str,
    variables: Sequence[str],
) -> Dict[str, float]:
    """Point-biserial coefficient of one 0/1 column against each listed variable."""
    flags = frame[binary].to_numpy()
    result = {}
    for name in variables:
        if name == binary:
            continue
        try:
            result[name] = point_biserial(flags, frame[name].to_numpy())
        except UndefinedCorrelationError as e:
            logger.warning("Skipping %s vs %s: %s", binary, name, e)
    return result


def course_summary(frame: pd.DataFrame) -> pd.DataFrame:
    """Per-course averages of grade, GPA, pass indicator and number of tries."""
    if frame.empty:
        raise EmptyInputError("no records to summarise")
    summary = (
        frame.groupby("course", sort=True)[["grade", "gpa", "pass", "attempts"]]
        .mean()
        .reset_index()
    )
    return summary
