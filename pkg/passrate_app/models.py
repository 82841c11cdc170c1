"""
Core domain vocabulary shared by every module.
Registrations, course instances, performance and group assignment matrices, permutations.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from passrate_app.config import GRADE_MAX_TENTHS, PASS_GRADE_TENTHS
from passrate_app.errors import (
    DimensionMismatchError,
    OutOfRangeError,
    SumConditionError,
)


class ApvKind(str, Enum):
    """Academic performance variable being optimized."""
    GRADE = "grade"
    PASS = "pass"


class Method(str, Enum):
    """Optimization problem: instructor assignment or student assignment."""
    IA = "ia"
    SA = "sa"


class Provenance(str, Enum):
    FILE = "file"
    SYNTHETIC = "synthetic"


class EnrollmentRecord(BaseModel):
    """
    One registration row.

    Grade and GPA are stored in tenths (0-50) so that "one decimal" is exact;
    `grade` and `gpa` expose them as decimals.
    """
    model_config = ConfigDict(frozen=True)

    student_id: str = Field(..., min_length=1)
    course: str = Field(..., min_length=1)
    year: int
    semester: int = Field(..., ge=1, le=2)
    grade_tenths: int = Field(..., ge=0, le=GRADE_MAX_TENTHS)
    gpa_tenths: int = Field(..., ge=0, le=GRADE_MAX_TENTHS)
    passed: bool
    age: int = Field(..., ge=0)
    academic_age: int = Field(..., ge=0)
    gender: int = Field(..., ge=0, le=1)
    attempts: int = Field(..., ge=1)
    cancellations: int = Field(..., ge=0)
    cancelled: bool = False
    section: int = Field(..., ge=1)
    section_capacity: int = Field(..., ge=1)
    enrolled_count: int = Field(..., ge=1)
    instructor_id: str = Field(..., min_length=1)
    tenured: bool

    @model_validator(mode="after")
    def _check_pass_flag(self) -> "EnrollmentRecord":
        if self.passed != (self.grade_tenths >= PASS_GRADE_TENTHS):
            raise ValueError(
                f"pass flag {self.passed} inconsistent with grade {self.grade_tenths / 10:.1f}"
            )
        return self

    @property
    def grade(self) -> float:
        return self.grade_tenths / 10

    @property
    def gpa(self) -> float:
        return self.gpa_tenths / 10

    @property
    def term(self) -> Tuple[int, int]:
        return (self.year, self.semester)


def _readonly(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def _as_integer_array(values, name: str) -> np.ndarray:
    array = np.asarray(values)
    if array.size and not np.all(np.equal(np.mod(array, 1), 0)):
        raise OutOfRangeError(f"{name} must contain integers")
    array = array.astype(np.int64)
    if np.any(array < 0):
        raise OutOfRangeError(f"{name} must be nonnegative")
    return array


@dataclass(frozen=True)
class Permutation:
    """
    Bijection on {0, ..., K-1}.

    For instructor assignment, mapping[i] is the section given to instructor row i.
    For student assignment, mapping[j] is the instructor row teaching section j.
    """
    mapping: Tuple[int, ...]

    def __post_init__(self):
        mapping = tuple(int(i) for i in self.mapping)
        if sorted(mapping) != list(range(len(mapping))):
            raise OutOfRangeError(f"not a permutation of 0..{len(mapping) - 1}: {mapping}")
        object.__setattr__(self, "mapping", mapping)

    @classmethod
    def identity(cls, size: int) -> "Permutation":
        return cls(tuple(range(size)))

    @property
    def size(self) -> int:
        return len(self.mapping)

    def __getitem__(self, index: int) -> int:
        return self.mapping[index]

    def __len__(self) -> int:
        return len(self.mapping)

    def inverse(self) -> "Permutation":
        inverse = [0] * self.size
        for source, target in enumerate(self.mapping):
            inverse[target] = source
        return Permutation(tuple(inverse))

    def as_matrix(self) -> np.ndarray:
        """Permutation matrix A with A[mapping[j], j] = 1."""
        matrix = np.zeros((self.size, self.size), dtype=np.int64)
        matrix[list(self.mapping), list(range(self.size))] = 1
        return matrix

    def apply_rows(self, matrix: np.ndarray) -> np.ndarray:
        """Row j of the result is row mapping[j] of `matrix`."""
        matrix = np.asarray(matrix)
        if matrix.shape[0] != self.size:
            raise DimensionMismatchError(
                f"permutation of size {self.size} applied to {matrix.shape[0]} rows"
            )
        return matrix[list(self.mapping)]


@dataclass(frozen=True, eq=False)
class CourseInstance:
    """Characteristic numbers of one course offering: p, g and the classification c."""
    populations: np.ndarray
    capacities: np.ndarray
    classification: Optional[np.ndarray] = None

    def __post_init__(self):
        p = _as_integer_array(self.populations, "segment populations")
        g = _as_integer_array(self.capacities, "section capacities")
        if p.ndim != 1 or g.ndim != 1 or p.size == 0 or g.size == 0:
            raise DimensionMismatchError("populations and capacities must be nonempty vectors")
        if p.sum() != g.sum():
            raise SumConditionError(
                f"sum of populations {int(p.sum())} != sum of capacities {int(g.sum())}"
            )
        classes = self.classification
        if classes is not None:
            classes = _as_integer_array(classes, "classification")
            if classes.size != p.sum():
                raise DimensionMismatchError(
                    f"classification covers {classes.size} students, expected {int(p.sum())}"
                )
            if classes.size and classes.max() >= p.size:
                raise OutOfRangeError("classification refers to an unknown segment")
            if not np.array_equal(np.bincount(classes, minlength=p.size), p):
                raise SumConditionError("classification does not match segment populations")
            object.__setattr__(self, "classification", _readonly(classes, np.int64))
        object.__setattr__(self, "populations", _readonly(p, np.int64))
        object.__setattr__(self, "capacities", _readonly(g, np.int64))

    @classmethod
    def from_classification(
        cls, classification: Sequence[int], segment_count: int, capacities: Sequence[int]
    ) -> "CourseInstance":
        classes = _as_integer_array(classification, "classification")
        populations = np.bincount(classes, minlength=segment_count)
        return cls(populations, capacities, classes)

    @property
    def N(self) -> int:
        return int(self.populations.sum())

    @property
    def L(self) -> int:
        return int(self.populations.size)

    @property
    def J(self) -> int:
        return int(self.capacities.size)


@dataclass(frozen=True, eq=False)
class PerformanceMatrix:
    """J x L matrix of expected APV of instructor row j on segment l."""
    entries: np.ndarray
    apv_kind: ApvKind = ApvKind.PASS

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 2 or entries.size == 0:
            raise DimensionMismatchError(f"performance matrix must be 2-D, got shape {entries.shape}")
        upper = 1.0 if ApvKind(self.apv_kind) is ApvKind.PASS else GRADE_MAX_TENTHS / 10
        if np.any(~np.isfinite(entries)) or entries.min() < 0.0 or entries.max() > upper:
            raise OutOfRangeError(f"{ApvKind(self.apv_kind).value} entries must lie in [0, {upper}]")
        object.__setattr__(self, "entries", _readonly(entries, float))
        object.__setattr__(self, "apv_kind", ApvKind(self.apv_kind))

    @property
    def J(self) -> int:
        return int(self.entries.shape[0])

    @property
    def L(self) -> int:
        return int(self.entries.shape[1])


@dataclass(frozen=True, eq=False)
class GroupAssignmentMatrix:
    """
    L x J matrix of nonnegative integers: segment-l students placed in section j.

    Row sums must equal `populations` and column sums `capacities`; when the
    margins are omitted they are taken from the matrix itself.
    """
    entries: np.ndarray
    populations: Optional[np.ndarray] = None
    capacities: Optional[np.ndarray] = None

    def __post_init__(self):
        entries = _as_integer_array(self.entries, "group assignment matrix")
        if entries.ndim != 2 or entries.size == 0:
            raise DimensionMismatchError(f"group assignment matrix must be 2-D, got shape {entries.shape}")
        p = entries.sum(axis=1) if self.populations is None else _as_integer_array(self.populations, "populations")
        g = entries.sum(axis=0) if self.capacities is None else _as_integer_array(self.capacities, "capacities")
        if p.shape != (entries.shape[0],) or g.shape != (entries.shape[1],):
            raise DimensionMismatchError("margin vectors do not match the matrix shape")
        if not np.array_equal(entries.sum(axis=1), p):
            raise SumConditionError(f"row sums {entries.sum(axis=1).tolist()} != populations {p.tolist()}")
        if not np.array_equal(entries.sum(axis=0), g):
            raise SumConditionError(f"column sums {entries.sum(axis=0).tolist()} != capacities {g.tolist()}")
        object.__setattr__(self, "entries", _readonly(entries, np.int64))
        object.__setattr__(self, "populations", _readonly(p, np.int64))
        object.__setattr__(self, "capacities", _readonly(g, np.int64))

    @property
    def L(self) -> int:
        return int(self.entries.shape[0])

    @property
    def J(self) -> int:
        return int(self.entries.shape[1])

    @property
    def N(self) -> int:
        return int(self.entries.sum())


MatrixLike = Union[PerformanceMatrix, GroupAssignmentMatrix, np.ndarray, Sequence[Sequence[float]]]


def as_array(matrix: MatrixLike) -> np.ndarray:
    """Plain float ndarray view of any matrix-like input."""
    if isinstance(matrix, (PerformanceMatrix, GroupAssignmentMatrix)):
        return np.asarray(matrix.entries, dtype=float)
    return np.asarray(matrix, dtype=float)


def choice_matrix(T: MatrixLike, G: MatrixLike) -> np.ndarray:
    """
    Choice performance matrix C = T . G.

    Args:
        T: J x L performance matrix
        G: L x J group assignment matrix

    Returns:
        J x J matrix; entry (j, i) is instructor j's expected APV summed over section i

    Raises:
        DimensionMismatchError: If T's columns do not match G's rows
    """
    t = as_array(T)
    g = as_array(G)
    if t.ndim != 2 or g.ndim != 2 or t.shape[1] != g.shape[0]:
        raise DimensionMismatchError(f"cannot multiply {t.shape} by {g.shape}")
    return t @ g
