"""
Tests for instructor performance estimation.
"""
import numpy as np
import pytest

from passrate_app.dataset import DatasetHandle
from passrate_app.errors import UnknownInstructorError, UnresolvableBaselineError
from passrate_app.models import ApvKind
from passrate_app.performance import EntrySource, estimate, performance_matrix
from passrate_app.segmentation import SegmentationScheme, classify_many, segment

WHOLE_RANGE = SegmentationScheme((0.0, 5.0))


def _records(make_record, instructor, tenured, grades, start=0, year=2015):
    return [
        make_record(
            student_id=f"S{start + n:04d}",
            instructor_id=instructor,
            tenured=tenured,
            grade_tenths=grade,
            year=year,
        )
        for n, grade in enumerate(grades)
    ]


def test_unanimous_pass_gives_one(make_record):
    """40 passes out of 40 in a segment give entry 1.0."""
    data = DatasetHandle(_records(make_record, "DC-T01", True, [35] * 40))
    table = estimate(data, "DC", WHOLE_RANGE, ApvKind.PASS)
    profile = table["DC-T01"]
    assert profile.entries.tolist() == [1.0]
    assert profile.sources == (EntrySource.PERSONAL,)


def test_sparse_instructor_falls_back_to_group(make_record):
    """Below min_obs the tenured group mean is used."""
    records = _records(make_record, "DC-T01", True, [35] * 40)
    records += _records(make_record, "DC-T02", True, [10] * 5, start=100)
    table = estimate(DatasetHandle(records), "DC", WHOLE_RANGE, ApvKind.PASS, min_obs=30)
    assert table["DC-T02"].entries[0] == pytest.approx(40 / 45)
    assert table["DC-T02"].sources == (EntrySource.GROUP,)
    assert table["DC-T02"].counts.tolist() == [5]


def test_missing_group_uses_other_group(make_record):
    """An adjunct with no adjunct peers borrows the tenured mean."""
    records = _records(make_record, "DC-T01", True, [40] * 40)
    records += _records(make_record, "DC-A01", False, [20] * 3, start=100)
    scheme = SegmentationScheme((0.0, 2.0, 5.0))
    table = estimate(DatasetHandle(records), "DC", scheme, ApvKind.GRADE, min_obs=30)
    adjunct = table["DC-A01"]
    # every record has gpa 3.2, so segment 0 is empty everywhere
    assert adjunct.sources[0] is EntrySource.COURSE
    assert adjunct.entries[1] == pytest.approx(2.0)
    assert table.baseline.tenured_mean[1] == pytest.approx(4.0)


def test_personal_means_match_group_by(small_corpus):
    """Entries with enough observations equal an independent group-by."""
    frame = small_corpus.completed
    scheme = segment(frame["gpa"].to_numpy())
    table = estimate(small_corpus, "DC", scheme, ApvKind.GRADE, min_obs=15)
    frame = frame.assign(segment=classify_many(scheme, frame["gpa"].to_numpy()))
    means = frame.groupby(["instructor_id", "segment"])["grade"].agg(["count", "mean"])

    checked = 0
    for (instructor_id, index), row in means.iterrows():
        if row["count"] >= 15:
            assert table[instructor_id].entries[index] == pytest.approx(row["mean"], abs=1e-12)
            checked += 1
    assert checked > 0


def test_roster_adds_absent_instructor(make_record):
    """Roster instructors without records receive their group baseline."""
    data = DatasetHandle(_records(make_record, "DC-T01", True, [35] * 10))
    table = estimate(data, "DC", WHOLE_RANGE, ApvKind.PASS, roster={"DC-A09": False})
    assert "DC-A09" in table
    assert table["DC-A09"].entries.tolist() == table.baseline.adjunct_mean.tolist()


def test_unknown_course_has_no_baseline(sample_data):
    """A course without registrations cannot be estimated."""
    with pytest.raises(UnresolvableBaselineError):
        estimate(sample_data, "NM", WHOLE_RANGE, ApvKind.PASS)


def test_performance_matrix_rows(sample_data):
    """Rows follow the section order; permuting instructors permutes rows."""
    scheme = segment(sample_data.completed["gpa"].to_numpy())
    table = estimate(sample_data, "DC", scheme, ApvKind.PASS, min_obs=5)
    ids = ["DC-T01", "DC-A01", "DC-A02"]
    T = performance_matrix(table, ids)
    reversed_T = performance_matrix(table, ids[::-1])
    assert T.entries.shape == (3, scheme.L)
    np.testing.assert_array_equal(T.entries[::-1], reversed_T.entries)


def test_identical_profiles_give_identical_rows(sample_data):
    """The same instructor twice yields two equal rows."""
    table = estimate(sample_data, "DC", WHOLE_RANGE, ApvKind.PASS)
    T = performance_matrix(table, ["DC-A03", "DC-A03"])
    assert T.entries.shape == (2, 1)
    assert T.entries[0, 0] == T.entries[1, 0]


def test_unknown_instructor(sample_data):
    """Missing profiles are reported."""
    table = estimate(sample_data, "DC", WHOLE_RANGE, ApvKind.PASS)
    with pytest.raises(UnknownInstructorError):
        performance_matrix(table, ["DC-Z99"])


def test_table_groups_and_frame(sample_data):
    """Group membership and the long export."""
    table = estimate(sample_data, "DC", WHOLE_RANGE, ApvKind.PASS)
    assert table.instructors(tenured=True) == ["DC-T01", "DC-T02"]
    assert table.instructors(tenured=False) == ["DC-A01", "DC-A02", "DC-A03", "DC-A04"]
    frame = table.to_frame()
    assert len(frame) == 6
    assert set(frame["source"]) <= {s.value for s in EntrySource}


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
