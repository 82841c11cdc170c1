"""
Closed-form expectations of random assignments and the normalization metrics.

X_IA is the choice-matrix value of a uniformly random instructor permutation and
X_SA the performance of a uniformly random student assignment with fixed section
fills. Their expectations have closed forms:

    E(X_IA) = sum(C) / K
    E(X_SA) = g' T p / N

The enumeration helpers visit every permutation / every assignment and are used
as exact oracles on small instances.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from passrate_app.config import ZERO_ENHANCEMENT_TOLERANCE
from passrate_app.errors import (
    DimensionMismatchError,
    EmptyInputError,
    OutOfRangeError,
    SumConditionError,
    ZeroBaselineError,
)
from passrate_app.models import GroupAssignmentMatrix, Method, MatrixLike, Permutation, as_array
from passrate_app.randomization import draw_assignment

logger = logging.getLogger(__name__)


def _square(C: MatrixLike) -> np.ndarray:
    c = as_array(C)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] == 0:
        raise DimensionMismatchError(f"expected a nonempty square matrix, got shape {c.shape}")
    return c


def _capacities(g: Sequence[int]) -> List[int]:
    capacities = [int(x) for x in g]
    if not capacities:
        raise EmptyInputError("capacities must be nonempty")
    if any(x < 0 for x in capacities):
        raise OutOfRangeError("capacities must be nonnegative")
    return capacities


def expected_ia(C: MatrixLike) -> float:
    """Expected value of a uniformly random instructor permutation: sum(C) / K."""
    c = _square(C)
    return float(c.sum() / c.shape[0])


def expected_sa(T: MatrixLike, p: Sequence[int], g: Sequence[int]) -> float:
    """
    Expected performance of a uniformly random student assignment: g' T p / N.

    Raises:
        EmptyInputError: If N = 0
        SumConditionError: If sum(p) != sum(g)
        DimensionMismatchError: If T is not len(g) x len(p)
    """
    t = as_array(T)
    p = np.asarray(p, dtype=float)
    g = np.asarray(g, dtype=float)
    if t.shape != (g.size, p.size):
        raise DimensionMismatchError(f"T has shape {t.shape}, expected ({g.size}, {p.size})")
    n = p.sum()
    if n == 0:
        raise EmptyInputError("expected_sa needs at least one student")
    if n != g.sum():
        raise SumConditionError(f"sum of populations {n:g} != sum of capacities {g.sum():g}")
    return float(g @ t @ p / n)


def omega_cardinality(g: Sequence[int]) -> int:
    """Number of student assignments with section fills g: N! / prod(g_j!)."""
    capacities = _capacities(g)
    count = math.factorial(sum(capacities))
    for size in capacities:
        count //= math.factorial(size)
    return count


def omega_slice_cardinality(g: Sequence[int], j: int) -> int:
    """Assignments sending one fixed student to section j: (N-1)!/(g_j-1)! * prod_{i != j} 1/g_i!."""
    capacities = _capacities(g)
    if not 0 <= j < len(capacities):
        raise OutOfRangeError(f"section {j} outside 0..{len(capacities) - 1}")
    if capacities[j] == 0:
        return 0
    reduced = list(capacities)
    reduced[j] -= 1
    return omega_cardinality(reduced)


def _rows(T: MatrixLike, pi: Optional[Permutation]) -> np.ndarray:
    t = as_array(T)
    if pi is None:
        return t
    return pi.apply_rows(t)


def sa_value_of(T: MatrixLike, pi: Optional[Permutation], G: MatrixLike) -> float:
    """
    Global performance sum_j (T G)(pi(j), j) = trace(T[pi] G).

    Args:
        T: J x L performance matrix
        pi: Instructor row teaching each section (None for identity)
        G: L x J group assignment matrix

    Raises:
        DimensionMismatchError: On non-conformable shapes
    """
    t = _rows(T, pi)
    g = as_array(G)
    if t.ndim != 2 or g.ndim != 2 or t.shape[1] != g.shape[0] or t.shape[0] != g.shape[1]:
        raise DimensionMismatchError(f"T {t.shape} and G {g.shape} are not conformable")
    return float(np.einsum("jl,lj->", t, g))


def student_sum_value(
    T: MatrixLike,
    classes: Sequence[int],
    omega: Sequence[int],
    pi: Optional[Permutation] = None,
) -> float:
    """Sum over students n of T(pi(omega(n)), c(n))."""
    t = _rows(T, pi)
    classes = np.asarray(classes, dtype=np.int64)
    omega = np.asarray(omega, dtype=np.int64)
    if classes.shape != omega.shape:
        raise DimensionMismatchError("classification and assignment must cover the same students")
    return float(t[omega, classes].sum())


def group_matrix_of(classes: Sequence[int], omega: Sequence[int], L: int, J: int) -> GroupAssignmentMatrix:
    """G(l, j) = number of students of segment l assigned to section j."""
    entries = np.zeros((L, J), dtype=np.int64)
    np.add.at(entries, (np.asarray(classes, dtype=np.int64), np.asarray(omega, dtype=np.int64)), 1)
    return GroupAssignmentMatrix(entries)


def normalize(v: float, baseline: float) -> float:
    """
    Relative enhancement 100 (v - baseline) / baseline, in percent.

    Returns exactly 0.0 when v and baseline agree to a relative 1e-9.

    Raises:
        ZeroBaselineError: If baseline is zero
    """
    if baseline == 0:
        raise ZeroBaselineError("relative enhancement against a zero baseline")
    if abs(v - baseline) <= ZERO_ENHANCEMENT_TOLERANCE * abs(baseline):
        return 0.0
    return 100.0 * (v - baseline) / baseline


@dataclass(frozen=True, eq=False)
class AssignmentSampler:
    """
    Source of random baseline configurations.

    IA mode holds a choice matrix C; SA mode holds T, the student classification,
    the section fills and the instructor map pi.
    """
    mode: Method
    C: Optional[np.ndarray] = None
    T: Optional[np.ndarray] = None
    classes: Optional[np.ndarray] = None
    capacities: Optional[Tuple[int, ...]] = None
    pi: Optional[Permutation] = None

    @classmethod
    def for_ia(cls, C: MatrixLike) -> "AssignmentSampler":
        return cls(Method.IA, C=_square(C))

    @classmethod
    def for_sa(
        cls,
        T: MatrixLike,
        classes: Sequence[int],
        capacities: Sequence[int],
        pi: Optional[Permutation] = None,
    ) -> "AssignmentSampler":
        t = as_array(T)
        classes = np.asarray(classes, dtype=np.int64)
        capacities = tuple(_capacities(capacities))
        if t.shape[0] != len(capacities):
            raise DimensionMismatchError(f"T has {t.shape[0]} rows for {len(capacities)} sections")
        if classes.size != sum(capacities):
            raise SumConditionError(f"{classes.size} students for {sum(capacities)} seats")
        if classes.size and (classes.min() < 0 or classes.max() >= t.shape[1]):
            raise OutOfRangeError("classification refers to an unknown segment")
        return cls(Method.SA, T=t, classes=classes, capacities=capacities, pi=pi)

    def expected(self) -> float:
        """Closed-form expectation of one draw."""
        if self.mode is Method.IA:
            return expected_ia(self.C)
        populations = np.bincount(self.classes, minlength=self.T.shape[1])
        return expected_sa(_rows(self.T, self.pi), populations, self.capacities)


def draw_baseline(sampler: AssignmentSampler, rng: np.random.Generator) -> float:
    """
    One realization of X_IA (uniform permutation) or X_SA (uniform multiset shuffle).

    Args:
        sampler: Instance to sample from
        rng: Random generator consumed by the draw

    Returns:
        Value of the drawn configuration
    """
    if sampler.mode is Method.IA:
        sigma = rng.permutation(sampler.C.shape[0])
        return float(sampler.C[np.arange(sigma.size), sigma].sum())

    omega = draw_assignment(sampler.capacities, rng)
    return student_sum_value(sampler.T, sampler.classes, omega, sampler.pi)


def iter_omega(g: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """Every distinct assignment of N students to sections with fills g."""
    remaining = _capacities(g)
    total = sum(remaining)
    prefix: List[int] = []

    def visit():
        if len(prefix) == total:
            yield tuple(prefix)
            return
        for section, left in enumerate(remaining):
            if left == 0:
                continue
            remaining[section] -= 1
            prefix.append(section)
            yield from visit()
            prefix.pop()
            remaining[section] += 1

    yield from visit()


def _compositions(total: int, bounds: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """Weak compositions of `total` into len(bounds) parts, part k at most bounds[k]."""
    if len(bounds) == 1:
        if total <= bounds[0]:
            yield (total,)
        return
    for value in range(min(total, bounds[0]) + 1):
        for rest in _compositions(total - value, bounds[1:]):
            yield (value,) + rest


def iter_group_matrices(p: Sequence[int], g: Sequence[int]) -> Iterator[np.ndarray]:
    """Every L x J nonnegative integer matrix with row sums p and column sums g."""
    populations = [int(x) for x in p]
    capacities = _capacities(g)
    if sum(populations) != sum(capacities):
        raise SumConditionError(f"sum of populations {sum(populations)} != sum of capacities {sum(capacities)}")

    def visit(row: int, left: Tuple[int, ...]):
        if row == len(populations) - 1:
            yield (left,)
            return
        for composition in _compositions(populations[row], left):
            rest = tuple(c - x for c, x in zip(left, composition))
            for tail in visit(row + 1, rest):
                yield (composition,) + tail

    for rows in visit(0, tuple(capacities)):
        yield np.array(rows, dtype=np.int64)


def enumerate_expected_ia(C: MatrixLike) -> float:
    """Average of sum_k C(k, sigma(k)) over all K! permutations."""
    c = _square(C)
    size = c.shape[0]
    values = [
        math.fsum(c[k, sigma[k]] for k in range(size))
        for sigma in itertools.permutations(range(size))
    ]
    return math.fsum(values) / len(values)


def enumerate_expected_sa(
    T: MatrixLike,
    classes: Sequence[int],
    g: Sequence[int],
    pi: Optional[Permutation] = None,
) -> float:
    """Average student-sum value over every assignment in Omega."""
    values = [student_sum_value(T, classes, omega, pi) for omega in iter_omega(g)]
    return math.fsum(values) / len(values)
