"""
Tests for the instructor and student assignment solvers against brute-force oracles.
"""
import itertools

import numpy as np
import pytest

from passrate_app.errors import DimensionMismatchError, SumConditionError
from passrate_app.expectations import iter_group_matrices, sa_value_of
from passrate_app.models import GroupAssignmentMatrix, Permutation
from passrate_app.solvers import assignment_dual_bound, solve_ia, solve_sa


def _best_permutation_value(C):
    size = C.shape[0]
    return max(sum(C[i, sigma[i]] for i in range(size)) for sigma in itertools.permutations(range(size)))


def test_solve_ia_identity():
    """Diagonal dominance keeps the identity."""
    solution = solve_ia([[1, 0], [0, 1]])
    assert solution.assignment.mapping == (0, 1)
    assert solution.value == 2


def test_solve_ia_swap():
    """Off-diagonal dominance swaps."""
    solution = solve_ia([[0, 1], [1, 0]])
    assert solution.assignment.mapping == (1, 0)
    assert solution.value == 2


def test_solve_ia_matches_brute_force():
    """100 random 5x5 matrices: exact equality with the best of 120 permutations."""
    rng = np.random.default_rng(17)
    for _ in range(100):
        C = rng.random((5, 5))
        solution = solve_ia(C, certify=False)
        sigma = solution.assignment
        assert solution.value == sum(C[i, sigma[i]] for i in range(5))
        assert solution.value == pytest.approx(_best_permutation_value(C), abs=1e-12)


def test_dual_bound_certifies_optimum():
    """The LP dual closes the gap."""
    rng = np.random.default_rng(4)
    C = rng.random((6, 6)) * 30
    solution = solve_ia(C)
    assert solution.dual_bound == pytest.approx(solution.value, abs=1e-6)
    assert assignment_dual_bound(C) == pytest.approx(_best_permutation_value(C), abs=1e-6)


def test_solve_ia_rejects_rectangular():
    """Instructor assignment is square."""
    with pytest.raises(DimensionMismatchError):
        solve_ia(np.ones((2, 3)))


def test_solve_sa_single_segment():
    """L = 1 leaves no freedom."""
    T = np.array([[0.5], [0.8], [0.2]])
    g = [3, 4, 5]
    solution = solve_sa(T, [12], g)
    assert solution.G_opt.entries.tolist() == [[3, 4, 5]]
    assert solution.value == pytest.approx(0.5 * 3 + 0.8 * 4 + 0.2 * 5)


def test_solve_sa_two_by_two():
    """Each student goes to the instructor best for their segment."""
    solution = solve_sa(np.array([[5.0, 1.0], [1.0, 5.0]]) / 5, [1, 1], [1, 1])
    assert solution.G_opt.entries.tolist() == [[1, 0], [0, 1]]
    assert solution.value == pytest.approx(2.0)


def test_solve_sa_matches_enumeration():
    """50 random instances with N <= 8: optimum equals the exhaustive maximum."""
    rng = np.random.default_rng(23)
    for _ in range(50):
        L = int(rng.integers(1, 4))
        J = int(rng.integers(1, 4))
        N = int(rng.integers(max(L, J), 9))
        p = np.bincount(rng.integers(0, L, N), minlength=L)
        g = np.bincount(rng.integers(0, J, N), minlength=J)
        T = rng.random((J, L))
        pi = Permutation(tuple(rng.permutation(J)))

        best = max(sa_value_of(T, pi, G) for G in iter_group_matrices(p, g))
        solution = solve_sa(T, p, g, pi)
        assert solution.value == pytest.approx(best, abs=1e-5)
        assert solution.G_opt.populations.tolist() == p.tolist()
        assert solution.G_opt.capacities.tolist() == g.tolist()


def test_solve_sa_incumbent_never_lost():
    """A better incumbent is returned unchanged."""
    T = np.array([[0.3, 0.9], [0.6, 0.1]])
    incumbent = GroupAssignmentMatrix([[0, 2], [3, 0]])
    solution = solve_sa(T, [2, 3], [3, 2], incumbent=incumbent)
    assert solution.value >= sa_value_of(T, None, incumbent)


def test_solve_sa_rejects_incumbent_with_other_margins():
    """An incumbent for another semester cannot replace the optimum."""
    T = np.array([[0.3, 0.9], [0.6, 0.1]])
    with pytest.raises(SumConditionError):
        solve_sa(T, [2, 3], [3, 2], incumbent=GroupAssignmentMatrix([[1, 1], [1, 2]]))
    with pytest.raises(SumConditionError):
        solve_sa(T, [2, 3], [3, 2], incumbent=GroupAssignmentMatrix([[1, 2], [2, 0]]))


def test_solve_sa_margin_errors():
    """Populations and capacities must match each other and T."""
    with pytest.raises(SumConditionError):
        solve_sa(np.ones((2, 2)) / 2, [1, 2], [1, 1])
    with pytest.raises(DimensionMismatchError):
        solve_sa(np.ones((3, 2)) / 2, [1, 1], [1, 1])


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
