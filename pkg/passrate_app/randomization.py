"""
Random semester generation.

A random semester draws the enrollment NE, the GPA frequency vector X_GPA, the
section count NS and the tenured count NT uniformly on their confidence intervals,
builds a section plan whose capacities add up to NE exactly, and assigns students
to sections uniformly at random.

Stream order inside one semester: NE, X_GPA components, NS, step-3 section choice,
student shuffle, NT.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from passrate_app.config import (
    CAPACITY_INTERVALS,
    DC_CAPACITY_FREQUENCIES,
    DC_ENROLLMENT_INTERVAL,
    DC_GPA_FREQUENCY_LOWER,
    DC_GPA_FREQUENCY_UPPER,
    DC_SECTIONS_INTERVAL,
    DC_TENURED_INTERVAL,
    GPA_GRID_TENTHS,
)
from passrate_app.dataset import DatasetHandle
from passrate_app.errors import (
    EmptyInputError,
    InfeasiblePlanError,
    OutOfRangeError,
    SumConditionError,
)
from passrate_app.models import GroupAssignmentMatrix
from passrate_app.segmentation import SegmentationScheme, classify_many, segment
from passrate_app.stats import ConfidenceInterval, confidence_interval

logger = logging.getLogger(__name__)

GPA_GRID = np.asarray(GPA_GRID_TENTHS) / 10


@dataclass(frozen=True)
class CapacityInterval:
    """One of the nine fixed section-capacity groups [K_left, K_right]."""
    lower: int
    upper: int

    def __post_init__(self):
        if (self.lower, self.upper) not in CAPACITY_INTERVALS:
            raise OutOfRangeError(f"[{self.lower}, {self.upper}] is not a capacity group")

    def __contains__(self, capacity: int) -> bool:
        return self.lower <= capacity <= self.upper


CAPACITY_GROUPS = tuple(CapacityInterval(lower, upper) for lower, upper in CAPACITY_INTERVALS)


def capacity_group(capacity: int) -> int:
    """Index of the capacity group holding `capacity`; sizes beyond the table clamp to the end groups."""
    for index, group in enumerate(CAPACITY_GROUPS):
        if capacity <= group.upper:
            return index
    return len(CAPACITY_GROUPS) - 1


class RandomSemesterConfig(BaseModel):
    """Confidence intervals and mean frequencies driving random semesters."""
    model_config = ConfigDict(frozen=True)

    nt_interval: ConfidenceInterval
    ne_interval: ConfidenceInterval
    ns_interval: ConfidenceInterval
    sf_bar: List[float] = Field(..., description="Mean frequency of each capacity group")
    gpa_freq_intervals: List[ConfidenceInterval]
    seed: int = Field(0, ge=0, lt=2**64)

    @field_validator("nt_interval", "ne_interval", "ns_interval")
    @classmethod
    def _check_count_interval(cls, interval):
        if not interval.integer_valued:
            raise ValueError("count intervals must be integer-valued")
        if interval.lower < 0:
            raise ValueError("count intervals must be nonnegative")
        return interval

    @field_validator("sf_bar")
    @classmethod
    def _check_sf_bar(cls, sf_bar):
        if len(sf_bar) != len(CAPACITY_INTERVALS):
            raise ValueError(f"sf_bar needs {len(CAPACITY_INTERVALS)} components, got {len(sf_bar)}")
        if any(f < 0 for f in sf_bar):
            raise ValueError("sf_bar must be nonnegative")
        if abs(sum(sf_bar) - 1.0) > 1e-9:
            raise ValueError(f"sf_bar must sum to 1, got {sum(sf_bar):.12f}")
        return sf_bar

    @field_validator("gpa_freq_intervals")
    @classmethod
    def _check_gpa_intervals(cls, intervals):
        if len(intervals) != len(GPA_GRID_TENTHS):
            raise ValueError(f"need {len(GPA_GRID_TENTHS)} GPA frequency intervals, got {len(intervals)}")
        if any(i.lower < 0 or i.upper > 1 for i in intervals):
            raise ValueError("GPA frequency intervals must lie in [0, 1]")
        if all(i.upper == 0 for i in intervals):
            raise ValueError("at least one GPA frequency interval must allow positive mass")
        return intervals


@dataclass(frozen=True)
class SectionPlan:
    """
    Section capacities grouped by capacity interval.

    `capacities[k]` belongs to group `groups[k]`; df1, df2, df3 are the residuals
    |sum - NE| after each fitting step.
    """
    section_counts: Tuple[int, ...]
    capacities: Tuple[int, ...]
    groups: Tuple[int, ...]
    df1: int
    df2: int
    df3: int

    @property
    def J(self) -> int:
        return len(self.capacities)

    @property
    def total(self) -> int:
        return sum(self.capacities)


@dataclass(frozen=True, eq=False)
class RandomSemester:
    """One realization of a semester: plan, GPA counts, segmentation and group matrix."""
    ne: int
    ns: int
    nt: int
    plan: SectionPlan
    gpa_counts: np.ndarray
    scheme: SegmentationScheme
    classes: np.ndarray
    omega: np.ndarray
    G: GroupAssignmentMatrix

    @property
    def capacities(self) -> Tuple[int, ...]:
        return self.plan.capacities


def sample_scalar(interval: ConfidenceInterval, rng: np.random.Generator):
    """Uniform draw on the integer lattice of the interval or on the real interval."""
    if interval.integer_valued:
        return int(rng.integers(int(interval.lower), int(interval.upper) + 1))
    return float(rng.uniform(interval.lower, interval.upper))


def realize_sections(ns: int, sf_bar: Sequence[float]) -> np.ndarray:
    """
    Sections per capacity group: componentwise ceiling of ns * sf_bar.

    Raises:
        OutOfRangeError: If ns < 1
    """
    if ns < 1:
        raise OutOfRangeError(f"number of sections must be positive, got {ns}")
    products = ns * np.asarray(sf_bar, dtype=float)
    return np.maximum(np.ceil(products - 1e-9), 0).astype(np.int64)


def _largest_remainder(total: int, weights: np.ndarray) -> np.ndarray:
    quotas = total * weights
    counts = np.floor(quotas).astype(np.int64)
    remainder = total - int(counts.sum())
    order = np.argsort(-(quotas - counts), kind="stable")
    counts[order[:remainder]] += 1
    return counts


def realize_gpa(
    ne: int,
    freq_intervals: Sequence[ConfidenceInterval],
    rng: np.random.Generator,
) -> np.ndarray:
    """
    GPA counts over the 50-point grid summing to ne.

    Each frequency is drawn uniformly in its interval, the vector is renormalised
    (redrawn when every component came out zero) and apportioned by largest remainder.
    """
    if ne < 1:
        raise OutOfRangeError(f"enrollment must be positive, got {ne}")
    lows = np.array([i.lower for i in freq_intervals], dtype=float)
    highs = np.array([i.upper for i in freq_intervals], dtype=float)
    if not highs.any():
        raise OutOfRangeError("GPA frequency intervals admit no positive mass")

    while True:
        draw = rng.uniform(lows, highs)
        if draw.sum() > 0:
            break
        logger.debug("All-zero GPA frequency draw; resampling")
    return _largest_remainder(ne, draw / draw.sum())


def _repair_small(capacities: np.ndarray) -> None:
    while capacities.min() < 1:
        small = int(np.argmin(capacities))
        large = int(np.argmax(capacities))
        capacities[small] += 1
        capacities[large] -= 1


def fit_capacities(
    section_counts: Sequence[int],
    ne: int,
    rng: Optional[np.random.Generator] = None,
) -> SectionPlan:
    """
    Capacities inside the capacity groups adding up to ne.

    Step 1 picks capacities within their groups closest to ne. Step 2 closes (or
    opens) whole sections, largest group first, while the residual exceeds that
    group's right (or left) extreme. Step 3 spreads what is left evenly, +/-1 on a
    random subset of sections, possibly leaving capacities outside their group.

    Args:
        section_counts: Sections per capacity group (nine entries)
        ne: Enrollment to accommodate
        rng: Generator for the step-3 subset (None picks the first sections)

    Returns:
        SectionPlan with sum(capacities) == ne

    Raises:
        InfeasiblePlanError: If there is no section or ne is below the section count
    """
    counts = [int(c) for c in section_counts]
    if len(counts) != len(CAPACITY_GROUPS):
        raise OutOfRangeError(f"need {len(CAPACITY_GROUPS)} section counts, got {len(counts)}")
    if any(c < 0 for c in counts) or sum(counts) == 0:
        raise InfeasiblePlanError("a section plan needs at least one section")
    if ne < sum(counts):
        raise InfeasiblePlanError(f"{ne} students cannot fill {sum(counts)} sections")

    # Step 1
    lefts = [CAPACITY_GROUPS[k].lower for k in range(len(counts))]
    rights = [CAPACITY_GROUPS[k].upper for k in range(len(counts))]
    left_total = sum(c * lo for c, lo in zip(counts, lefts))
    right_total = sum(c * hi for c, hi in zip(counts, rights))
    if ne <= left_total:
        sections = [[lefts[k]] * counts[k] for k in range(len(counts))]
    elif ne >= right_total:
        sections = [[rights[k]] * counts[k] for k in range(len(counts))]
    else:
        extra = ne - left_total
        sections = []
        for k in reversed(range(len(counts))):
            group = []
            for _ in range(counts[k]):
                lift = min(extra, rights[k] - lefts[k])
                group.append(lefts[k] + lift)
                extra -= lift
            sections.append(group)
        sections.reverse()
    total = sum(sum(group) for group in sections)
    df1 = abs(total - ne)

    # Step 2
    residual = total - ne
    for k in reversed(range(len(counts))):
        if residual > 0:
            while sections[k] and residual > rights[k]:
                residual -= sections[k].pop()
        elif residual < 0 and counts[k] > 0:
            while -residual > lefts[k]:
                sections[k].append(lefts[k])
                residual += lefts[k]
    df2 = abs(residual)
    if df2 > df1:
        raise InfeasiblePlanError(f"section adjustment increased the residual from {df1} to {df2}")

    groups = np.array([k for k in range(len(counts)) for _ in sections[k]], dtype=np.int64)
    capacities = np.array([x for group in sections for x in group], dtype=np.int64)
    if ne < capacities.size:
        raise InfeasiblePlanError(f"{ne} students cannot fill {capacities.size} sections")

    # Step 3
    if residual != 0:
        sign = -1 if residual > 0 else 1
        size = capacities.size
        whole, rest = divmod(df2, size)
        capacities += sign * whole
        chosen = rng.choice(size, size=rest, replace=False) if rng is not None else np.arange(rest)
        capacities[chosen] += sign
        _repair_small(capacities)
        logger.debug("Spread residual %d over %d sections (%d each, %d extra)", df2, size, whole, rest)
    df3 = abs(int(capacities.sum()) - ne)
    if df3 != 0:
        raise InfeasiblePlanError(f"capacity fit left a residual of {df3}")

    return SectionPlan(
        section_counts=tuple(int(np.sum(groups == k)) for k in range(len(counts))),
        capacities=tuple(int(x) for x in capacities),
        groups=tuple(int(k) for k in groups),
        df1=int(df1),
        df2=int(df2),
        df3=int(df3),
    )


def draw_assignment(capacities: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """Uniform element of Omega: a shuffle of the multiset {0 x g_0, ..., (J-1) x g_(J-1)}."""
    labels = np.repeat(np.arange(len(capacities)), np.asarray(capacities, dtype=np.int64))
    return rng.permutation(labels)


def expand_gpa(gpa_counts: Sequence[int]) -> np.ndarray:
    """GPA value of every student, grid order."""
    return np.repeat(GPA_GRID, np.asarray(gpa_counts, dtype=np.int64))


def _assign(
    capacities: Sequence[int],
    gpa_counts: Sequence[int],
    scheme: SegmentationScheme,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray, GroupAssignmentMatrix]:
    capacities = np.asarray(capacities, dtype=np.int64)
    gpas = expand_gpa(gpa_counts)
    if gpas.size != capacities.sum():
        raise SumConditionError(f"{gpas.size} students for {int(capacities.sum())} seats")
    classes = classify_many(scheme, gpas)
    omega = draw_assignment(capacities, rng)
    entries = np.zeros((scheme.L, capacities.size), dtype=np.int64)
    np.add.at(entries, (classes, omega), 1)
    populations = np.bincount(classes, minlength=scheme.L)
    return classes, omega, GroupAssignmentMatrix(entries, populations, capacities)


def random_group_matrix(
    plan: SectionPlan,
    gpa_counts: Sequence[int],
    scheme: SegmentationScheme,
    rng: np.random.Generator,
) -> GroupAssignmentMatrix:
    """
    Group assignment matrix of a uniformly random student assignment.

    Raises:
        SumConditionError: If the GPA counts and plan capacities disagree on N
    """
    return _assign(plan.capacities, gpa_counts, scheme, rng)[2]


def generate_random_semester(
    config: RandomSemesterConfig,
    rng: np.random.Generator,
    scheme: Optional[SegmentationScheme] = None,
) -> RandomSemester:
    """
    Draw one random semester.

    Args:
        config: Intervals and frequencies to sample from
        rng: Generator; consumed in the documented stream order
        scheme: Fixed segmentation; by default the semester's own GPAs are segmented

    Returns:
        RandomSemester with NT clamped to the number of sections
    """
    ne = sample_scalar(config.ne_interval, rng)
    gpa_counts = realize_gpa(ne, config.gpa_freq_intervals, rng)
    ns = sample_scalar(config.ns_interval, rng)
    plan = fit_capacities(realize_sections(ns, config.sf_bar), ne, rng)
    if scheme is None:
        scheme = segment(expand_gpa(gpa_counts))
    classes, omega, G = _assign(plan.capacities, gpa_counts, scheme, rng)
    nt = min(sample_scalar(config.nt_interval, rng), plan.J)

    logger.info(
        "Random semester: NE=%d NS=%d J=%d NT=%d df=(%d, %d, %d)",
        ne, ns, plan.J, nt, plan.df1, plan.df2, plan.df3,
    )
    return RandomSemester(
        ne=ne,
        ns=ns,
        nt=nt,
        plan=plan,
        gpa_counts=gpa_counts,
        scheme=scheme,
        classes=classes,
        omega=omega,
        G=G,
    )


def reference_semester_config(seed: int = 0) -> RandomSemesterConfig:
    """DC reference tables: NT, NE, NS intervals, capacity frequencies and X_GPA intervals."""
    sf_bar = np.asarray(DC_CAPACITY_FREQUENCIES) / math.fsum(DC_CAPACITY_FREQUENCIES)

    def counts(interval):
        return ConfidenceInterval(lower=interval[0], upper=interval[1], integer_valued=True)

    return RandomSemesterConfig(
        nt_interval=counts(DC_TENURED_INTERVAL),
        ne_interval=counts(DC_ENROLLMENT_INTERVAL),
        ns_interval=counts(DC_SECTIONS_INTERVAL),
        sf_bar=sf_bar.tolist(),
        gpa_freq_intervals=[
            ConfidenceInterval(lower=lo, upper=hi)
            for lo, hi in zip(DC_GPA_FREQUENCY_LOWER, DC_GPA_FREQUENCY_UPPER)
        ],
        seed=seed,
    )


def estimate_semester_config(dataset: DatasetHandle, course: str, seed: int = 0) -> RandomSemesterConfig:
    """
    Mine randomization intervals from a course's historical terms.

    Per term: NT (distinct tenured instructors), NE (completed registrations), NS
    (sections), the capacity-group frequencies of section headcounts and the GPA
    frequency vector. Counts get integer intervals, frequencies intervals clamped to [0, 1].

    Raises:
        EmptyInputError: If fewer than two terms have completed registrations
    """
    frame = dataset.completed
    frame = frame[frame["course"] == course]
    terms = sorted(frame.groupby(["year", "semester"]).groups.keys())
    if len(terms) < 2:
        raise EmptyInputError(f"need at least two terms of {course} to estimate intervals, got {len(terms)}")

    nts, nes, nss, sfs, freqs = [], [], [], [], []
    for (year, semester), term in frame.groupby(["year", "semester"], sort=True):
        headcounts = term.groupby("section").size().to_numpy()
        nts.append(term.loc[term["tenured"] == 1, "instructor_id"].nunique())
        nes.append(len(term))
        nss.append(headcounts.size)
        groups = np.bincount([capacity_group(int(h)) for h in headcounts], minlength=len(CAPACITY_GROUPS))
        sfs.append(groups / headcounts.size)
        buckets = np.clip(term["gpa_tenths"].to_numpy(), 1, len(GPA_GRID_TENTHS)) - 1
        freqs.append(np.bincount(buckets, minlength=len(GPA_GRID_TENTHS)) / len(term))

    sf_bar = np.mean(sfs, axis=0)
    sf_bar = sf_bar / sf_bar.sum()
    freqs = np.asarray(freqs)
    logger.info("Estimated randomization intervals for %s from %d terms", course, len(terms))
    return RandomSemesterConfig(
        nt_interval=confidence_interval(nts, integer_valued=True, lower_bound=0),
        ne_interval=confidence_interval(nes, integer_valued=True, lower_bound=1),
        ns_interval=confidence_interval(nss, integer_valued=True, lower_bound=1),
        sf_bar=sf_bar.tolist(),
        gpa_freq_intervals=[
            confidence_interval(freqs[:, k], lower_bound=0.0, upper_bound=1.0)
            for k in range(freqs.shape[1])
        ],
        seed=seed,
    )
