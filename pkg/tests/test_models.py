"""
Tests for the core domain types.
"""
import numpy as np
import pytest

from passrate_app.errors import DimensionMismatchError, OutOfRangeError, SumConditionError
from passrate_app.models import (
    ApvKind,
    CourseInstance,
    GroupAssignmentMatrix,
    PerformanceMatrix,
    Permutation,
    choice_matrix,
)


def test_choice_matrix_scalar():
    """1x1 product is a plain multiplication."""
    assert choice_matrix([[0.5]], [[10]]).tolist() == [[5.0]]


def test_choice_matrix_identity():
    """Identity T leaves G unchanged."""
    C = choice_matrix(np.eye(2), [[3, 0], [0, 4]])
    np.testing.assert_array_equal(C, [[3, 0], [0, 4]])


def test_choice_matrix_matches_triple_loop():
    """C(j, i) = sum_l T(j, l) G(l, i)."""
    rng = np.random.default_rng(3)
    T = rng.random((3, 2))
    G = rng.integers(0, 5, (2, 3))
    C = choice_matrix(T, G)
    for j in range(3):
        for i in range(3):
            assert C[j, i] == pytest.approx(sum(T[j, l] * G[l, i] for l in range(2)))


def test_choice_matrix_shape_mismatch():
    """Non-conformable shapes are rejected."""
    with pytest.raises(DimensionMismatchError):
        choice_matrix(np.ones((2, 3)), np.ones((2, 2)))


def test_course_instance_sum_condition():
    """Populations and capacities must describe the same students."""
    instance = CourseInstance([3, 2], [4, 1])
    assert (instance.N, instance.L, instance.J) == (5, 2, 2)
    with pytest.raises(SumConditionError):
        CourseInstance([3, 2], [4, 2])


def test_course_instance_from_classification():
    """Populations are counted from the classification."""
    instance = CourseInstance.from_classification([0, 1, 1, 2], 3, [2, 2])
    assert instance.populations.tolist() == [1, 2, 1]


def test_group_assignment_margins():
    """Margins default to the matrix sums and must agree when given."""
    G = GroupAssignmentMatrix([[1, 2], [3, 0]])
    assert G.populations.tolist() == [3, 3]
    assert G.capacities.tolist() == [4, 2]
    assert G.N == 6
    with pytest.raises(SumConditionError):
        GroupAssignmentMatrix([[1, 2], [3, 0]], populations=[3, 2])


def test_group_assignment_rejects_fractions():
    """Entries are integers."""
    with pytest.raises(OutOfRangeError):
        GroupAssignmentMatrix([[0.5, 1.0]])


def test_performance_matrix_ranges():
    """Pass entries live in [0, 1], grades in [0, 5]."""
    PerformanceMatrix([[0.2, 0.9]], ApvKind.PASS)
    PerformanceMatrix([[3.5, 4.9]], ApvKind.GRADE)
    with pytest.raises(OutOfRangeError):
        PerformanceMatrix([[1.2]], ApvKind.PASS)


def test_performance_matrix_is_read_only():
    """Stored arrays cannot be mutated."""
    T = PerformanceMatrix([[0.5, 0.5]])
    with pytest.raises(ValueError):
        T.entries[0, 0] = 1.0


def test_permutation_inverse_and_matrix():
    """inverse composes to identity; as_matrix places ones at (mapping[j], j)."""
    pi = Permutation((2, 0, 1))
    inverse = pi.inverse()
    assert [inverse[pi[i]] for i in range(3)] == [0, 1, 2]
    A = pi.as_matrix()
    assert A[2, 0] == 1 and A[0, 1] == 1 and A[1, 2] == 1
    assert A.sum() == 3


def test_permutation_apply_rows():
    """Row j of the result is row mapping[j]."""
    pi = Permutation((1, 0))
    np.testing.assert_array_equal(pi.apply_rows(np.array([[1, 2], [3, 4]])), [[3, 4], [1, 2]])


def test_permutation_rejects_non_bijection():
    """Repeated targets are not a permutation."""
    with pytest.raises(OutOfRangeError):
        Permutation((0, 0, 1))


def test_enrollment_record_pass_flag(make_record):
    """The pass flag must agree with the grade."""
    record = make_record(grade_tenths=30)
    assert record.passed and record.grade == 3.0
    with pytest.raises(ValueError):
        make_record(grade_tenths=29, passed=True)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
