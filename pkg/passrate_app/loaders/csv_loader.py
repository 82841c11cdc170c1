"""
Enrollment table loader.
Parses the registration CSV into validated records and writes the canonical form back.
"""
import logging
from pathlib import Path
from typing import Dict, Union

import pandas as pd
from pydantic import ValidationError

from passrate_app.config import CSV_COLUMNS, GRADE_MAX_TENTHS, KNOWN_COURSES
from passrate_app.dataset import DatasetHandle, canonical_text
from passrate_app.errors import DatasetFormatError, UnknownCourseError
from passrate_app.models import EnrollmentRecord, Provenance

logger = logging.getLogger(__name__)

_BOOLEANS = {"1": True, "0": False, "true": True, "false": False}


def _parse_int(text: str, column: str, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise DatasetFormatError(f"{column}: expected an integer, got {text!r}", line)


def _parse_bool(text: str, column: str, line: int) -> bool:
    value = _BOOLEANS.get(text.strip().lower())
    if value is None:
        raise DatasetFormatError(f"{column}: expected 1/0, got {text!r}", line)
    return value


def _parse_tenths(text: str, column: str, line: int) -> int:
    """Decimal with at most one fractional digit, returned in tenths."""
    try:
        scaled = float(text) * 10
    except ValueError:
        raise DatasetFormatError(f"{column}: expected a decimal, got {text!r}", line)
    tenths = int(round(scaled))
    if abs(scaled - tenths) > 1e-6:
        raise DatasetFormatError(f"{column}: {text!r} has more than one decimal digit", line)
    if not 0 <= tenths <= GRADE_MAX_TENTHS:
        raise DatasetFormatError(f"{column} {text} outside [0.0, {GRADE_MAX_TENTHS / 10:.1f}]", line)
    return tenths


def _parse_row(row: Dict[str, str], line: int) -> EnrollmentRecord:
    course = row["course"].strip()
    if course not in KNOWN_COURSES:
        raise UnknownCourseError(f"unknown course code {course!r}", line)

    try:
        return EnrollmentRecord(
            student_id=row["student_id"].strip(),
            course=course,
            year=_parse_int(row["year"], "year", line),
            semester=_parse_int(row["semester"], "semester", line),
            grade_tenths=_parse_tenths(row["grade"], "grade", line),
            gpa_tenths=_parse_tenths(row["gpa"], "gpa", line),
            passed=_parse_bool(row["pass"], "pass", line),
            age=_parse_int(row["age"], "age", line),
            academic_age=_parse_int(row["academic_age"], "academic_age", line),
            gender=_parse_int(row["gender"], "gender", line),
            attempts=_parse_int(row["attempts"], "attempts", line),
            cancellations=_parse_int(row["cancellations"], "cancellations", line),
            cancelled=_parse_bool(row["cancelled"], "cancelled", line),
            section=_parse_int(row["section"], "section", line),
            section_capacity=_parse_int(row["section_capacity"], "section_capacity", line),
            enrolled_count=_parse_int(row["enrolled_count"], "enrolled_count", line),
            instructor_id=row["instructor_id"].strip(),
            tenured=_parse_bool(row["tenured"], "tenured", line),
        )
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "record"
        raise DatasetFormatError(f"{location}: {first['msg']}", line)


def load_dataset(file_path: Union[str, Path]) -> DatasetHandle:
    """
    Load an enrollment CSV file.

    Args:
        file_path: Path to the CSV file

    Returns:
        DatasetHandle with every row; cancelled rows are kept and flagged

    Raises:
        DatasetFormatError: If the header or a row is malformed (with its line number)
        UnknownCourseError: If a row names a course outside the catalogue
        OSError: If the file cannot be read
    """
    file_path = Path(file_path)
    try:
        frame = pd.read_csv(file_path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise DatasetFormatError("file is empty; a header row is required", 1)
    except pd.errors.ParserError as e:
        raise DatasetFormatError(f"malformed CSV: {e}")

    if tuple(frame.columns) != CSV_COLUMNS:
        raise DatasetFormatError(
            f"unexpected header {','.join(frame.columns)}; expected {','.join(CSV_COLUMNS)}", 1
        )

    records = []
    seen = set()
    # Line 1 is the header
    for line, row in enumerate(frame.to_dict(orient="records"), start=2):
        record = _parse_row(row, line)
        key = (record.student_id, record.course, record.year, record.semester)
        if key in seen:
            raise DatasetFormatError(
                f"student {record.student_id} registered twice in {record.course} "
                f"{record.year}-{record.semester}",
                line,
            )
        seen.add(key)
        records.append(record)

    logger.info("Loaded %d records from %s", len(records), file_path)
    return DatasetHandle(tuple(records), Provenance.FILE)


def write_dataset(handle: DatasetHandle, file_path: Union[str, Path]) -> Path:
    """
    Write records in the canonical CSV dialect (UTF-8, comma, one-decimal grades).

    Args:
        handle: Dataset to write
        file_path: Destination path

    Returns:
        The written path
    """
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, "w", encoding="utf-8", newline="") as f:
        f.write(canonical_text(handle.records))
    return file_path
