"""
Quantile segmentation of students.
Builds decile cut points with repeated extremes removed and classifies values into intervals.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from passrate_app.config import GPA_LOWER, GPA_UPPER, SEGMENT_COUNT
from passrate_app.errors import EmptyInputError, OutOfRangeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SegmentationScheme:
    """
    Strictly increasing cut points c_0 < ... < c_L.

    Interval l is (c_l, c_{l+1}] except the first, which also contains c_0.
    """
    cut_points: Tuple[float, ...]

    def __post_init__(self):
        cuts = tuple(float(c) for c in self.cut_points)
        if not 2 <= len(cuts) <= SEGMENT_COUNT + 1:
            raise OutOfRangeError(f"a scheme needs 2 to {SEGMENT_COUNT + 1} cut points, got {len(cuts)}")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise OutOfRangeError(f"cut points must be strictly increasing: {cuts}")
        object.__setattr__(self, "cut_points", cuts)

    @property
    def L(self) -> int:
        return len(self.cut_points) - 1

    @property
    def lower(self) -> float:
        return self.cut_points[0]

    @property
    def upper(self) -> float:
        return self.cut_points[-1]

    @property
    def intervals(self) -> List[Tuple[float, float]]:
        return list(zip(self.cut_points, self.cut_points[1:]))

    def label(self, index: int) -> str:
        a, b = self.intervals[index]
        opening = "[" if index == 0 else "("
        return f"{opening}{a:.1f}, {b:.1f}]"


def segment(
    values: Sequence[float],
    lower: float = GPA_LOWER,
    upper: float = GPA_UPPER,
) -> SegmentationScheme:
    """
    Decile segmentation of a sample.

    The sorted sample supplies extreme i = v[floor(i n / 10) - 1] for i = 1..10,
    preceded by `lower`; the last extreme is forced to `upper` so the scheme covers
    unseen values, and repeated extremes are removed.

    Args:
        values: Sample of GPA (or age) values inside [lower, upper]
        lower: Left end of the covered range
        upper: Right end of the covered range

    Returns:
        SegmentationScheme with between 1 and 10 intervals

    Raises:
        EmptyInputError: If the sample is empty
        OutOfRangeError: If a value falls outside [lower, upper]
    """
    ordered = np.sort(np.asarray(values, dtype=float))
    n = ordered.size
    if n == 0:
        raise EmptyInputError("cannot segment an empty sample")
    if ordered[0] < lower or ordered[-1] > upper:
        raise OutOfRangeError(f"values must lie in [{lower}, {upper}]")

    extremes = [float(lower)]
    for i in range(1, SEGMENT_COUNT + 1):
        index = min(max(i * n // SEGMENT_COUNT - 1, 0), n - 1)
        extremes.append(float(ordered[index]))
    extremes[-1] = float(upper)

    cut_points = [extremes[0]]
    for value in extremes[1:]:
        if value > cut_points[-1]:
            cut_points.append(value)
    if len(cut_points) < len(extremes):
        logger.debug("Removed %d repeated extremes", len(extremes) - len(cut_points))
    return SegmentationScheme(tuple(cut_points))


def classify_many(scheme: SegmentationScheme, values: Sequence[float]) -> np.ndarray:
    """Vectorised classify: segment index of every value."""
    x = np.asarray(values, dtype=float)
    if x.size and (x.min() < scheme.lower or x.max() > scheme.upper):
        raise OutOfRangeError(f"values must lie in [{scheme.lower}, {scheme.upper}]")
    cuts = np.asarray(scheme.cut_points)
    return np.clip(np.searchsorted(cuts, x, side="left") - 1, 0, scheme.L - 1)


def classify(scheme: SegmentationScheme, value: float) -> int:
    """
    Index of the interval containing `value` (0-based).

    Raises:
        OutOfRangeError: If value lies outside the scheme's range
    """
    return int(classify_many(scheme, [value])[0])


def segment_populations(scheme: SegmentationScheme, values: Sequence[float]) -> np.ndarray:
    """Number of sample values falling into each interval."""
    return np.bincount(classify_many(scheme, values), minlength=scheme.L)
