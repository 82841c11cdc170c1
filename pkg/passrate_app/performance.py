"""
Instructor performance estimation.
Conditional APV means per (instructor, segment) with the group-baseline fallback below min_obs registrations.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from passrate_app.config import DEFAULT_MIN_OBS
from passrate_app.dataset import DatasetHandle
from passrate_app.errors import OutOfRangeError, UnknownInstructorError, UnresolvableBaselineError
from passrate_app.models import ApvKind, PerformanceMatrix
from passrate_app.segmentation import SegmentationScheme, classify_many

logger = logging.getLogger(__name__)

SEGMENT_VARIABLES = ("gpa", "age")


class EntrySource(str, Enum):
    """Where a performance entry came from."""
    PERSONAL = "personal"
    GROUP = "group"
    OTHER_GROUP = "other_group"
    COURSE = "course"


@dataclass(frozen=True, eq=False)
class InstructorProfile:
    """Per-segment observation counts, raw means and resolved entries of one instructor."""
    instructor_id: str
    tenured: bool
    counts: np.ndarray
    means: np.ndarray
    entries: np.ndarray
    sources: Tuple[EntrySource, ...]


@dataclass(frozen=True, eq=False)
class GroupBaseline:
    """Resolved tenured and adjunct means per segment."""
    tenured_mean: np.ndarray
    adjunct_mean: np.ndarray
    tenured_sources: Tuple[EntrySource, ...]
    adjunct_sources: Tuple[EntrySource, ...]

    def for_group(self, tenured: bool) -> Tuple[np.ndarray, Tuple[EntrySource, ...]]:
        if tenured:
            return self.tenured_mean, self.tenured_sources
        return self.adjunct_mean, self.adjunct_sources


@dataclass(frozen=True, eq=False)
class PerformanceTable:
    """Resolved profiles keyed by instructor, with the baseline they fall back on."""
    course: str
    scheme: SegmentationScheme
    apv_kind: ApvKind
    min_obs: int
    profiles: Dict[str, InstructorProfile]
    baseline: GroupBaseline

    def __contains__(self, instructor_id: str) -> bool:
        return instructor_id in self.profiles

    def __getitem__(self, instructor_id: str) -> InstructorProfile:
        try:
            return self.profiles[instructor_id]
        except KeyError:
            raise UnknownInstructorError(f"no performance profile for instructor {instructor_id!r}")

    def instructors(self, tenured: Optional[bool] = None) -> list:
        """Sorted instructor ids, optionally restricted to one group."""
        return sorted(
            i for i, p in self.profiles.items() if tenured is None or p.tenured == tenured
        )

    def to_frame(self) -> pd.DataFrame:
        """Long table: one row per (instructor, segment)."""
        rows = []
        for instructor_id in sorted(self.profiles):
            profile = self.profiles[instructor_id]
            for index in range(self.scheme.L):
                rows.append({
                    "instructor_id": instructor_id,
                    "tenured": int(profile.tenured),
                    "segment": index + 1,
                    "interval": self.scheme.label(index),
                    "count": int(profile.counts[index]),
                    "mean": profile.means[index],
                    "entry": profile.entries[index],
                    "source": profile.sources[index].value,
                })
        return pd.DataFrame(rows)


def _segment_means(frame: pd.DataFrame, column: str, size: int) -> Tuple[np.ndarray, np.ndarray]:
    counts = np.zeros(size, dtype=np.int64)
    means = np.full(size, np.nan)
    if frame.empty:
        return counts, means
    grouped = frame.groupby("segment")[column].agg(["count", "mean"])
    counts[grouped.index.to_numpy()] = grouped["count"].to_numpy()
    means[grouped.index.to_numpy()] = grouped["mean"].to_numpy()
    return counts, means


def _resolve_baseline(frame: pd.DataFrame, column: str, size: int) -> GroupBaseline:
    if frame.empty:
        raise UnresolvableBaselineError("no completed registrations to estimate group baselines")

    _, tenured = _segment_means(frame[frame["tenured"] == 1], column, size)
    _, adjunct = _segment_means(frame[frame["tenured"] == 0], column, size)
    _, pooled = _segment_means(frame, column, size)
    course_mean = float(frame[column].mean())

    resolved = {}
    for name, own, other in (("tenured", tenured, adjunct), ("adjunct", adjunct, tenured)):
        values = own.copy()
        sources = [EntrySource.GROUP] * size
        for index in range(size):
            if not np.isnan(values[index]):
                continue
            if not np.isnan(other[index]):
                values[index] = other[index]
                sources[index] = EntrySource.OTHER_GROUP
            else:
                values[index] = pooled[index] if not np.isnan(pooled[index]) else course_mean
                sources[index] = EntrySource.COURSE
            logger.warning(
                "No %s observations in segment %d; using %s mean", name, index + 1, sources[index].value
            )
        resolved[name] = (values, tuple(sources))

    return GroupBaseline(
        tenured_mean=resolved["tenured"][0],
        adjunct_mean=resolved["adjunct"][0],
        tenured_sources=resolved["tenured"][1],
        adjunct_sources=resolved["adjunct"][1],
    )


def _latest_group(frame: pd.DataFrame) -> Dict[str, bool]:
    latest = frame.sort_values(["year", "semester"], kind="stable").groupby("instructor_id")["tenured"].last()
    return {str(k): bool(v) for k, v in latest.items()}


def estimate(
    records: DatasetHandle,
    course: str,
    scheme: SegmentationScheme,
    apv: ApvKind,
    min_obs: int = DEFAULT_MIN_OBS,
    variable: str = "gpa",
    roster: Optional[Mapping[str, bool]] = None,
) -> PerformanceTable:
    """
    Estimate every instructor's expected APV per segment.

    An entry is the instructor's own mean over their full teaching log in the course
    when that segment holds at least `min_obs` completed registrations; otherwise it
    is the mean of the instructor's group (tenured or adjunct) in that segment.

    Args:
        records: Dataset (any courses; only `course` is used)
        course: Course code
        scheme: Segmentation applied to `variable`
        apv: Grade or pass indicator
        min_obs: Personal-mean threshold
        variable: Segmentation variable, "gpa" or "age"
        roster: Extra instructors (id -> tenured) that must receive a profile even
            without registrations in the estimation window

    Returns:
        PerformanceTable holding profiles and the group baseline

    Raises:
        UnresolvableBaselineError: If the course has no completed registrations
    """
    if variable not in SEGMENT_VARIABLES:
        raise OutOfRangeError(f"segmentation variable must be one of {SEGMENT_VARIABLES}")
    if min_obs < 1:
        raise OutOfRangeError(f"min_obs must be positive, got {min_obs}")
    apv = ApvKind(apv)
    column = apv.value

    frame = records.completed
    frame = frame[frame["course"] == course]
    if frame.empty:
        raise UnresolvableBaselineError(f"no completed registrations for course {course}")
    frame = frame.assign(segment=classify_many(scheme, frame[variable].to_numpy()))

    size = scheme.L
    baseline = _resolve_baseline(frame, column, size)
    groups = _latest_group(frame)
    for instructor_id, tenured in (roster or {}).items():
        groups.setdefault(instructor_id, bool(tenured))

    profiles = {}
    for instructor_id, tenured in groups.items():
        personal = frame[frame["instructor_id"] == instructor_id]
        counts, means = _segment_means(personal, column, size)
        group_mean, group_sources = baseline.for_group(tenured)
        use_personal = counts >= min_obs
        entries = np.where(use_personal, np.nan_to_num(means), group_mean)
        sources = tuple(
            EntrySource.PERSONAL if use_personal[index] else group_sources[index]
            for index in range(size)
        )
        profiles[instructor_id] = InstructorProfile(
            instructor_id=instructor_id,
            tenured=tenured,
            counts=counts,
            means=means,
            entries=entries,
            sources=sources,
        )

    resolved = sum(s is EntrySource.PERSONAL for p in profiles.values() for s in p.sources)
    logger.info(
        "Estimated %d profiles for %s (%s): %d of %d entries personal",
        len(profiles), course, column, resolved, len(profiles) * size,
    )
    return PerformanceTable(
        course=course,
        scheme=scheme,
        apv_kind=apv,
        min_obs=min_obs,
        profiles=profiles,
        baseline=baseline,
    )


def performance_matrix(
    table: PerformanceTable,
    section_instructors: Sequence[str],
) -> PerformanceMatrix:
    """
    Stack the profiles of the instructors teaching sections 0..J-1.

    Args:
        table: Estimated performance table
        section_instructors: Instructor id per section (row order of T)

    Returns:
        J x L PerformanceMatrix

    Raises:
        UnknownInstructorError: If an instructor has no profile
    """
    rows = [table[instructor_id].entries for instructor_id in section_instructors]
    return PerformanceMatrix(np.vstack(rows), table.apv_kind)
