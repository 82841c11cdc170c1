"""
Shared fixtures: the bundled 200-row sample, a small synthetic corpus and a record factory.
"""
from pathlib import Path

import pytest

from passrate_app.loaders import generate_synthetic, load_dataset, load_synthetic_config
from passrate_app.models import EnrollmentRecord

DATA_DIR = Path(__file__).parent.parent / "data"


@pytest.fixture(scope="session")
def sample_path():
    return DATA_DIR / "sample_enrollments.csv"


@pytest.fixture(scope="session")
def sample_data(sample_path):
    return load_dataset(sample_path)


@pytest.fixture(scope="session")
def small_config():
    return load_synthetic_config(DATA_DIR / "synthetic_small.json")


@pytest.fixture(scope="session")
def dc_config():
    return load_synthetic_config(DATA_DIR / "synthetic_dc.json")


@pytest.fixture(scope="session")
def small_corpus(small_config):
    return generate_synthetic(small_config)


def build_record(**overrides) -> EnrollmentRecord:
    """A passing DC registration; any field can be overridden."""
    fields = dict(
        student_id="S0001",
        course="DC",
        year=2015,
        semester=1,
        grade_tenths=35,
        gpa_tenths=32,
        passed=True,
        age=19,
        academic_age=1,
        gender=0,
        attempts=1,
        cancellations=0,
        cancelled=False,
        section=1,
        section_capacity=40,
        enrolled_count=40,
        instructor_id="DC-T01",
        tenured=True,
    )
    fields.update(overrides)
    if "grade_tenths" in overrides and "passed" not in overrides:
        fields["passed"] = fields["grade_tenths"] >= 30
    return EnrollmentRecord(**fields)


@pytest.fixture
def make_record():
    return build_record
