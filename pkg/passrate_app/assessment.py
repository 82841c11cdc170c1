"""
Historical assessment.
Rebuilds each term's group matrix and instructor map, optimizes it and reports the relative enhancement.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from passrate_app.config import DEFAULT_MIN_OBS
from passrate_app.dataset import DatasetHandle, filter_dataset
from passrate_app.errors import (
    DimensionMismatchError,
    EmptyTermError,
    OutOfRangeError,
    ZeroBaselineError,
)
from passrate_app.expectations import normalize, sa_value_of
from passrate_app.models import (
    ApvKind,
    GroupAssignmentMatrix,
    MatrixLike,
    Method,
    PerformanceMatrix,
    Permutation,
    choice_matrix,
)
from passrate_app.performance import PerformanceTable, estimate, performance_matrix
from passrate_app.segmentation import SegmentationScheme, classify_many, segment
from passrate_app.solvers import solve_ia, solve_sa

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HistoricalTerm:
    """Reconstructed term: scheme, G_h, instructor map pi_h and performance matrix T."""
    course: str
    year: int
    semester: int
    scheme: SegmentationScheme
    G_h: GroupAssignmentMatrix
    pi_h: Permutation
    T: PerformanceMatrix
    sections: Tuple[int, ...]
    section_instructors: Tuple[str, ...]
    table: PerformanceTable

    @property
    def baseline(self) -> float:
        """h = sum_j (T G_h)(pi_h(j), j)."""
        return sa_value_of(self.T, self.pi_h, self.G_h)


@dataclass(frozen=True)
class EnhancementRecord:
    """Relative enhancement of one term for one method."""
    year: int
    semester: int
    method: Method
    apv_kind: ApvKind
    rho: float
    value: float
    baseline: float
    sections: int
    students: int


def _section_instructors(term_frame) -> Dict[int, str]:
    """Most frequent instructor of every section (ties broken by id)."""
    counts = term_frame.groupby(["section", "instructor_id"]).size().reset_index(name="n")
    counts = counts.sort_values(["section", "n", "instructor_id"], ascending=[True, False, True], kind="stable")
    return {int(s): str(i) for s, i in counts.drop_duplicates("section")[["section", "instructor_id"]].itertuples(index=False)}


def _group_matrix(classes: np.ndarray, section_index: np.ndarray, L: int, J: int) -> GroupAssignmentMatrix:
    entries = np.zeros((L, J), dtype=np.int64)
    np.add.at(entries, (classes, section_index), 1)
    return GroupAssignmentMatrix(entries)


def _estimation_data(data: DatasetHandle, course: str, year: int, semester: int, holdout: bool) -> DatasetHandle:
    log = filter_dataset(data, course)
    if not holdout:
        return log
    kept = tuple(r for r in log.records if (r.year, r.semester) != (year, semester))
    return DatasetHandle(kept, log.provenance)


def reconstruct_term(
    data: DatasetHandle,
    course: str,
    year: int,
    semester: int,
    apv: ApvKind,
    min_obs: int = DEFAULT_MIN_OBS,
    holdout: bool = False,
    variable: str = "gpa",
) -> HistoricalTerm:
    """
    Rebuild the historical configuration of one term.

    The scheme segments the term's own values; profiles are estimated over the
    course's full log (without the term itself when `holdout`). Sections are taken
    in ascending order, so pi_h is the identity on the section-ordered rows of T.

    Raises:
        EmptyTermError: If the term has no completed registrations
    """
    term = filter_dataset(data, course, year, semester).completed
    if term.empty:
        raise EmptyTermError(f"no completed registrations for {course} {year}-{semester}")

    estimation = _estimation_data(data, course, year, semester, holdout)
    if variable == "gpa":
        scheme = segment(term["gpa"].to_numpy())
    else:
        ages = np.concatenate([term[variable].to_numpy(), estimation.completed[variable].to_numpy()])
        lower, upper = float(ages.min()), float(ages.max())
        scheme = segment(term[variable].to_numpy(), lower=lower, upper=max(upper, lower + 1.0))

    roster = {
        str(i): bool(t)
        for i, t in term.groupby("instructor_id")["tenured"].max().items()
    }
    table = estimate(estimation, course, scheme, apv, min_obs=min_obs, variable=variable, roster=roster)

    owners = _section_instructors(term)
    sections = tuple(sorted(owners))
    instructors = tuple(owners[s] for s in sections)
    position = {s: j for j, s in enumerate(sections)}

    classes = classify_many(scheme, term[variable].to_numpy())
    section_index = np.array([position[int(s)] for s in term["section"]], dtype=np.int64)
    G_h = _group_matrix(classes, section_index, scheme.L, len(sections))

    return HistoricalTerm(
        course=course,
        year=year,
        semester=semester,
        scheme=scheme,
        G_h=G_h,
        pi_h=Permutation.identity(len(sections)),
        T=performance_matrix(table, instructors),
        sections=sections,
        section_instructors=instructors,
        table=table,
    )


def blend_costs(
    T_apv: MatrixLike,
    G: MatrixLike,
    T_age: MatrixLike,
    G_age: MatrixLike,
    w: float = 0.8,
) -> np.ndarray:
    """
    Weighted choice matrix w T_apv G + (1 - w) T_age G_age.

    Raises:
        OutOfRangeError: If w lies outside [0, 1]
        DimensionMismatchError: If the two choice matrices differ in shape
    """
    if not 0.0 <= w <= 1.0:
        raise OutOfRangeError(f"blend weight must lie in [0, 1], got {w}")
    apv = choice_matrix(T_apv, G)
    age = choice_matrix(T_age, G_age)
    if apv.shape != age.shape:
        raise DimensionMismatchError(f"choice matrices {apv.shape} and {age.shape} differ")
    return w * apv + (1.0 - w) * age


def assess_term(
    data: DatasetHandle,
    course: str,
    year: int,
    semester: int,
    apv: ApvKind,
    method: Method,
    min_obs: int = DEFAULT_MIN_OBS,
    holdout: bool = False,
    age_weight: Optional[float] = None,
) -> EnhancementRecord:
    """
    Optimize one historical term and measure rho = 100 (v - h) / h.

    Args:
        data: Full dataset
        course: Course code
        year: Term year
        semester: Term semester
        apv: Grade or pass indicator
        method: IA (permute instructors) or SA (redistribute students)
        min_obs: Personal-mean threshold for profiles
        holdout: Estimate profiles without the assessed term
        age_weight: IA only; blend the APV choice matrix with the age-segmented one

    Returns:
        EnhancementRecord

    Raises:
        EmptyTermError: If the term has no completed registrations
        ZeroBaselineError: If the historical value h is zero
    """
    apv, method = ApvKind(apv), Method(method)
    if age_weight is not None and method is not Method.IA:
        raise OutOfRangeError("age blending applies to instructor assignment only")

    term = reconstruct_term(data, course, year, semester, apv, min_obs=min_obs, holdout=holdout)

    if method is Method.IA:
        C = choice_matrix(term.T, term.G_h)
        if age_weight is not None:
            aged = reconstruct_term(data, course, year, semester, apv, min_obs=min_obs, holdout=holdout, variable="age")
            C = blend_costs(term.T, term.G_h, aged.T, aged.G_h, age_weight)
        h = float(np.trace(C))
        if h == 0:
            raise ZeroBaselineError(f"historical value is zero for {course} {year}-{semester}")
        v = solve_ia(C).value
    else:
        h = term.baseline
        if h == 0:
            raise ZeroBaselineError(f"historical value is zero for {course} {year}-{semester}")
        v = solve_sa(
            term.T, term.G_h.populations, term.G_h.capacities, term.pi_h, incumbent=term.G_h
        ).value

    rho = normalize(v, h)
    logger.info("%s %d-%d %s/%s: v=%.4f h=%.4f rho=%.4f", course, year, semester, method.value, apv.value, v, h, rho)
    return EnhancementRecord(
        year=year,
        semester=semester,
        method=method,
        apv_kind=apv,
        rho=rho,
        value=v,
        baseline=h,
        sections=term.G_h.J,
        students=term.G_h.N,
    )


def assess_history(
    data: DatasetHandle,
    course: str,
    apv: ApvKind,
    method: Method,
    min_obs: int = DEFAULT_MIN_OBS,
    holdout: bool = False,
    threads: Optional[int] = None,
    age_weight: Optional[float] = None,
    terms: Optional[Sequence[Tuple[int, int]]] = None,
) -> List[EnhancementRecord]:
    """
    Assess every term of a course.

    Terms are evaluated concurrently; the result is ordered by (year, semester).
    Terms without completed registrations or with a zero historical value are
    skipped with a warning.
    """
    if terms is None:
        terms = filter_dataset(data, course).terms()

    def run(term: Tuple[int, int]) -> Optional[EnhancementRecord]:
        year, semester = term
        try:
            return assess_term(
                data, course, year, semester, apv, method,
                min_obs=min_obs, holdout=holdout, age_weight=age_weight,
            )
        except (EmptyTermError, ZeroBaselineError) as e:
            logger.warning("Skipping %s %d-%d: %s", course, year, semester, e)
            return None

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(run, sorted(terms)))
    return [record for record in results if record is not None]


def mean_rho(records: Sequence[EnhancementRecord]) -> Optional[float]:
    """Average enhancement over assessed terms (None when nothing was assessed)."""
    if not records:
        return None
    return float(np.mean([record.rho for record in records]))
