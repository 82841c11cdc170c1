"""
Dataset handle over enrollment records.
Holds the immutable record sequence, its tabular view and a content fingerprint.
"""
import hashlib
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Tuple

import pandas as pd

from passrate_app.config import CSV_COLUMNS
from passrate_app.models import EnrollmentRecord, Provenance

logger = logging.getLogger(__name__)


def format_row(record: EnrollmentRecord) -> List[str]:
    """Canonical CSV cells of a record: one-decimal grades, booleans as 1/0."""
    return [
        record.student_id,
        record.course,
        str(record.year),
        str(record.semester),
        f"{record.grade_tenths // 10}.{record.grade_tenths % 10}",
        f"{record.gpa_tenths // 10}.{record.gpa_tenths % 10}",
        "1" if record.passed else "0",
        str(record.age),
        str(record.academic_age),
        str(record.gender),
        str(record.attempts),
        str(record.cancellations),
        "1" if record.cancelled else "0",
        str(record.section),
        str(record.section_capacity),
        str(record.enrolled_count),
        record.instructor_id,
        "1" if record.tenured else "0",
    ]


def canonical_text(records) -> str:
    """Canonical CSV body (header included) for a record sequence."""
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(",".join(format_row(record)) for record in records)
    return "\n".join(lines) + "\n"


def _get_text_hash(text: str) -> str:
    """
    Generate a digest identifying dataset content.

    Args:
        text: Canonical CSV text

    Returns:
        SHA256 hash of the text
    """
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True, eq=False)
class DatasetHandle:
    """Ordered, immutable collection of registrations plus where they came from."""
    records: Tuple[EnrollmentRecord, ...]
    provenance: Provenance = Provenance.FILE

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @cached_property
    def frame(self) -> pd.DataFrame:
        """One row per record; `grade`/`gpa` as decimals, `pass` as 0/1 integers."""
        columns = list(CSV_COLUMNS) + ["grade_tenths", "gpa_tenths"]
        rows = [
            {
                "student_id": r.student_id,
                "course": r.course,
                "year": r.year,
                "semester": r.semester,
                "grade": r.grade,
                "gpa": r.gpa,
                "pass": int(r.passed),
                "age": r.age,
                "academic_age": r.academic_age,
                "gender": r.gender,
                "attempts": r.attempts,
                "cancellations": r.cancellations,
                "cancelled": int(r.cancelled),
                "section": r.section,
                "section_capacity": r.section_capacity,
                "enrolled_count": r.enrolled_count,
                "instructor_id": r.instructor_id,
                "tenured": int(r.tenured),
                "grade_tenths": r.grade_tenths,
                "gpa_tenths": r.gpa_tenths,
            }
            for r in self.records
        ]
        return pd.DataFrame(rows, columns=columns)

    @property
    def completed(self) -> pd.DataFrame:
        """Rows with a final grade; cancelled registrations never feed APV statistics."""
        frame = self.frame
        return frame[frame["cancelled"] == 0]

    def terms(self) -> List[Tuple[int, int]]:
        """Distinct (year, semester) keys in chronological order."""
        return sorted({record.term for record in self.records})

    def courses(self) -> List[str]:
        return sorted({record.course for record in self.records})

    @cached_property
    def fingerprint(self) -> str:
        return _get_text_hash(canonical_text(self.records))


def filter_dataset(
    handle: DatasetHandle,
    course: str,
    year: Optional[int] = None,
    semester: Optional[int] = None,
) -> DatasetHandle:
    """
    Subset of records matching every provided predicate.

    Args:
        handle: Source dataset
        course: Course code to keep
        year: Optional year; None matches every year
        semester: Optional semester; None matches both

    Returns:
        New handle (possibly empty) with the same provenance
    """
    selected = tuple(
        record
        for record in handle.records
        if record.course == course
        and (year is None or record.year == year)
        and (semester is None or record.semester == semester)
    )
    logger.debug("filter %s/%s/%s kept %d of %d records", course, year, semester, len(selected), len(handle))
    return DatasetHandle(selected, handle.provenance)
