"""
Tests for the enrollment loaders and the synthetic generator.
"""
import numpy as np
import pytest

from passrate_app.config import CSV_COLUMNS
from passrate_app.dataset import DatasetHandle, canonical_text, filter_dataset
from passrate_app.errors import DatasetFormatError, UnknownCourseError
from passrate_app.loaders import (
    SyntheticConfig,
    generate_synthetic,
    load_dataset,
    write_dataset,
)
from passrate_app.models import Provenance
from passrate_app.stats import pearson

HEADER = ",".join(CSV_COLUMNS)
ROWS = [
    "S1,DC,2010,1,3.5,3.2,1,19,1,0,1,0,0,1,40,38,DC-T01,1",
    "S2,DC,2010,1,2.1,2.4,0,20,2,1,2,1,0,2,40,35,DC-A01,0",
    "S3,LA,2011,2,4.0,4.1,1,21,3,1,1,0,0,1,30,28,LA-T01,1",
]


def _write(tmp_path, lines):
    path = tmp_path / "enrollments.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_load_three_rows(tmp_path):
    """A well-formed file yields one record per row."""
    data = load_dataset(_write(tmp_path, [HEADER] + ROWS))
    assert len(data) == 3
    assert data.provenance is Provenance.FILE
    first = data.records[0]
    assert first.grade == 3.5 and first.passed and first.tenured


def test_load_header_only(tmp_path):
    """Header without rows is an empty dataset."""
    data = load_dataset(_write(tmp_path, [HEADER]))
    assert len(data) == 0


def test_grade_out_of_range_reports_line(tmp_path):
    """A grade of 5.1 is rejected at its line."""
    bad = ROWS[1].replace(",2.1,", ",5.1,")
    with pytest.raises(DatasetFormatError) as excinfo:
        load_dataset(_write(tmp_path, [HEADER, ROWS[0], bad]))
    assert excinfo.value.line == 3
    assert "line 3" in str(excinfo.value)


def test_two_decimals_rejected(tmp_path):
    """Grades carry at most one decimal."""
    bad = ROWS[0].replace(",3.5,", ",3.55,")
    with pytest.raises(DatasetFormatError):
        load_dataset(_write(tmp_path, [HEADER, bad]))


def test_unknown_course(tmp_path):
    """Courses outside the catalogue are rejected."""
    bad = ROWS[0].replace(",DC,", ",XX,")
    with pytest.raises(UnknownCourseError):
        load_dataset(_write(tmp_path, [HEADER, bad]))


def test_inconsistent_pass_flag(tmp_path):
    """pass must equal grade >= 3.0."""
    bad = ROWS[0].replace(",3.5,3.2,1,", ",3.5,3.2,0,")
    with pytest.raises(DatasetFormatError):
        load_dataset(_write(tmp_path, [HEADER, bad]))


def test_duplicate_registration(tmp_path):
    """A student registers at most once per course and term."""
    with pytest.raises(DatasetFormatError):
        load_dataset(_write(tmp_path, [HEADER, ROWS[0], ROWS[0]]))


def test_wrong_header(tmp_path):
    """Columns must follow the schema."""
    with pytest.raises(DatasetFormatError):
        load_dataset(_write(tmp_path, [HEADER.replace("gpa", "GPA")] + ROWS))


def test_write_then_load_keeps_content(tmp_path, sample_data):
    """The canonical writer reproduces the fingerprint."""
    path = write_dataset(sample_data, tmp_path / "copy.csv")
    reloaded = load_dataset(path)
    assert reloaded.fingerprint == sample_data.fingerprint
    assert path.read_text(encoding="utf-8") == canonical_text(sample_data.records)


def test_sample_fixture_shape(sample_data):
    """The bundled sample holds 200 rows over DC and LA."""
    assert len(sample_data) == 200
    assert sample_data.courses() == ["DC", "LA"]
    assert len(filter_dataset(sample_data, "DC").terms()) == 4


def test_filter_dataset(sample_data):
    """Predicates select course, year and semester."""
    term = filter_dataset(sample_data, "DC", 2015, 1)
    assert len(term) == 40
    assert all(r.course == "DC" and r.term == (2015, 1) for r in term)
    assert len(filter_dataset(sample_data, "DC")) == 160
    assert len(filter_dataset(sample_data, "NM")) == 0


def test_completed_excludes_cancelled(sample_data):
    """Cancelled registrations never reach the statistics."""
    assert len(sample_data.completed) == 196


def test_synthetic_is_deterministic():
    """Same config, same records."""
    config = SyntheticConfig(seed=5, terms=[(2012, 1)], enrollment_range=(1000, 1000))
    first = generate_synthetic(config)
    second = generate_synthetic(config)
    assert len(first) == 1000
    assert first.fingerprint == second.fingerprint
    assert first.provenance is Provenance.SYNTHETIC


def test_synthetic_point_mass_gpa():
    """A point-mass distribution puts every student at that GPA."""
    freqs = [0.0] * 50
    freqs[29] = 1.0
    config = SyntheticConfig(
        seed=1, terms=[(2012, 2)], enrollment_range=(200, 200), gpa_distribution=freqs
    )
    data = generate_synthetic(config)
    assert {r.gpa for r in data} == {3.0}


def test_synthetic_grade_gpa_correlation():
    """Default calibration gives a strong grade/GPA correlation."""
    config = SyntheticConfig(seed=2, terms=[(2013, 1)], enrollment_range=(5000, 5000))
    frame = generate_synthetic(config).completed
    r = pearson(frame["grade"].to_numpy(), frame["gpa"].to_numpy())
    assert 0.7 <= r <= 0.9


def test_synthetic_pass_flag_consistent(small_corpus):
    """Generated records satisfy the pass invariant and carry one row per student and term."""
    frame = small_corpus.frame
    np.testing.assert_array_equal(frame["pass"], (frame["grade_tenths"] >= 30).astype(int))
    assert not frame.duplicated(["student_id", "course", "year", "semester"]).any()


def test_synthetic_config_rejects_bad_frequencies():
    """GPA frequencies must sum to one."""
    with pytest.raises(ValueError):
        SyntheticConfig(gpa_distribution=[0.1] * 50)


def test_empty_handle_frame():
    """An empty dataset still exposes the schema columns."""
    frame = DatasetHandle(()).frame
    assert list(frame.columns)[: len(CSV_COLUMNS)] == list(CSV_COLUMNS)
    assert frame.empty


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
