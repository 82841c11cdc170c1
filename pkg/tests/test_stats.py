"""
Tests for correlation coefficients, confidence intervals and factor tables.
"""
import math

import numpy as np
import pandas as pd
import pytest

from passrate_app.errors import EmptyInputError, UndefinedCorrelationError
from passrate_app.stats import (
    CorrelationKind,
    binary_correlations,
    confidence_interval,
    correlation_matrix,
    course_summary,
    pearson,
    point_biserial,
)


def test_pearson_extremes():
    """Self-correlation is 1 and reversal is -1."""
    assert pearson([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)


def test_pearson_hand_computed():
    """(1,2,3,4) against (1,3,2,4) gives 0.8."""
    assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)


def test_pearson_zero_variance():
    """Constant input has no correlation."""
    with pytest.raises(UndefinedCorrelationError):
        pearson([1, 1, 1], [1, 2, 3])


def test_point_biserial_known_value():
    """M1 = 3.5, M0 = 1.5, sigma = sqrt(1.25)."""
    assert point_biserial([0, 0, 1, 1], [1, 2, 3, 4]) == pytest.approx(0.8944, abs=1e-4)


def test_point_biserial_equal_means():
    """Equal group means give zero."""
    assert point_biserial([0, 1, 1, 0], [1, 2, 1, 2]) == pytest.approx(0.0)


def test_point_biserial_agrees_with_pearson():
    """For a 0/1 variable both coefficients coincide."""
    rng = np.random.default_rng(11)
    for _ in range(20):
        flags = rng.integers(0, 2, 30)
        flags[:2] = [0, 1]
        y = rng.normal(size=30)
        assert point_biserial(flags, y) == pytest.approx(pearson(flags, y), abs=1e-12)


def test_point_biserial_rejects_single_class():
    """Both classes must be present."""
    with pytest.raises(UndefinedCorrelationError):
        point_biserial([1, 1, 1], [1, 2, 3])
    with pytest.raises(UndefinedCorrelationError):
        point_biserial([0, 2, 1], [1, 2, 3])


def test_confidence_interval_constant():
    """Zero spread collapses the interval."""
    interval = confidence_interval([5, 5, 5, 5], integer_valued=True)
    assert (interval.lower, interval.upper) == (5, 5)


def test_confidence_interval_tenured_counts():
    """DC tenured counts average 7.2667 and round out to [6, 8]."""
    samples = [6, 6] + [7] * 7 + [8] * 6
    assert np.mean(samples) == pytest.approx(7.2667, abs=1e-4)
    interval = confidence_interval(samples, integer_valued=True)
    assert (interval.lower, interval.upper) == (6, 8)
    assert interval.integer_valued


def test_confidence_interval_real_valued():
    """(0, 10): 5 -/+ 1.96 * 5 / sqrt(2)."""
    interval = confidence_interval([0, 10])
    half = 1.96 * 5 / math.sqrt(2)
    assert interval.lower == pytest.approx(5 - half)
    assert interval.upper == pytest.approx(5 + half)


def test_confidence_interval_clamped():
    """Frequencies are clamped to [0, 1]."""
    interval = confidence_interval([0.0, 0.0, 0.02], lower_bound=0.0, upper_bound=1.0)
    assert interval.lower == 0.0
    assert 0.0 < interval.upper <= 1.0


def test_confidence_interval_needs_two_samples():
    """A single observation has no spread."""
    with pytest.raises(EmptyInputError):
        confidence_interval([3.0])


def test_correlation_matrix_on_sample(sample_data):
    """Symmetric, unit diagonal, entries in [-1, 1], point-biserial for binary pairs."""
    report = correlation_matrix(sample_data.completed, ("grade", "gpa", "age", "pass"))
    matrix = report.matrix
    np.testing.assert_allclose(matrix, matrix.T)
    np.testing.assert_allclose(np.diag(matrix), 1.0)
    assert np.all(np.abs(matrix) <= 1.0)
    assert report.kinds[("pass", "grade")] is CorrelationKind.POINT_BISERIAL
    assert report.kinds[("grade", "gpa")] is CorrelationKind.PEARSON
    assert report.to_frame().loc["grade", "gpa"] > 0.3


def test_correlation_matrix_drops_constant_columns():
    """Zero-variance variables leave the table."""
    frame = pd.DataFrame({"a": [1.0, 2.0, 3.0], "b": [2.0, 1.0, 4.0], "c": [7.0, 7.0, 7.0]})
    report = correlation_matrix(frame, ("a", "b", "c"))
    assert report.variables == ("a", "b")


def test_binary_correlations_skip_self(sample_data):
    """The binary column is not correlated with itself."""
    values = binary_correlations(sample_data.completed, "pass", ("grade", "gpa", "pass"))
    assert set(values) == {"grade", "gpa"}
    assert values["grade"] > 0


def test_course_summary(sample_data):
    """One row per course with the four averages."""
    summary = course_summary(sample_data.completed)
    assert summary["course"].tolist() == ["DC", "LA"]
    assert list(summary.columns) == ["course", "grade", "gpa", "pass", "attempts"]
    assert summary["pass"].between(0, 1).all()


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
