"""
Synthetic enrollment generator.
Produces datasets shaped like the institutional registration table, calibrated to the DC reference tables.
"""
import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from passrate_app.config import (
    DC_ENROLLMENT_INTERVAL,
    DC_GPA_FREQUENCY_LOWER,
    DC_GPA_FREQUENCY_UPPER,
    DC_SECTIONS_INTERVAL,
    DC_TENURED_INTERVAL,
    GRADE_MAX_TENTHS,
    PASS_GRADE_TENTHS,
)
from passrate_app.dataset import DatasetHandle
from passrate_app.models import EnrollmentRecord, Provenance

logger = logging.getLogger(__name__)

SKILL_BANDS = 5


def _default_gpa_distribution() -> List[float]:
    midpoints = np.add(DC_GPA_FREQUENCY_LOWER, DC_GPA_FREQUENCY_UPPER) / 2
    return (midpoints / midpoints.sum()).tolist()


def _default_terms() -> List[Tuple[int, int]]:
    # 2010-1 through 2017-1
    return [(year, semester) for year in range(2010, 2018) for semester in (1, 2)][:15]


class GradeModel(BaseModel):
    """grade = intercept + slope * gpa + instructor offset + N(0, noise)."""
    model_config = ConfigDict(frozen=True)

    slope: float = Field(1.0, description="Grade points gained per GPA point")
    intercept: float = Field(-0.3, description="Grade at GPA zero")
    noise: float = Field(0.6, description="Standard deviation of the residual", ge=0.0)


class SyntheticConfig(BaseModel):
    """Parameters of a synthetic corpus; mirrors the JSON accepted by --synthetic."""
    model_config = ConfigDict(frozen=True)

    seed: int = Field(7, description="Root seed", ge=0, lt=2**64)
    courses: List[str] = Field(default_factory=lambda: ["DC"], min_length=1)
    terms: List[Tuple[int, int]] = Field(default_factory=_default_terms, min_length=1)
    enrollment_range: Tuple[int, int] = Field(DC_ENROLLMENT_INTERVAL, description="Per-term NE range")
    sections_range: Tuple[int, int] = Field(DC_SECTIONS_INTERVAL, description="Per-term NS range")
    tenured_per_term: Tuple[int, int] = Field(DC_TENURED_INTERVAL, description="Per-term NT range")
    tenured_pool: int = Field(10, ge=1)
    adjunct_pool: int = Field(20, ge=1)
    gpa_distribution: List[float] = Field(default_factory=_default_gpa_distribution)
    grade_model: GradeModel = Field(default_factory=GradeModel)
    skill_spread: float = Field(0.5, description="Instructor offsets drawn from [-spread, spread]", ge=0.0)
    cancel_rate: float = Field(0.03, ge=0.0, lt=1.0)

    @field_validator("terms")
    @classmethod
    def _check_terms(cls, terms):
        for year, semester in terms:
            if semester not in (1, 2):
                raise ValueError(f"semester must be 1 or 2, got {year}-{semester}")
        if len(set(terms)) != len(terms):
            raise ValueError("terms must be distinct")
        return terms

    @field_validator("gpa_distribution")
    @classmethod
    def _check_frequencies(cls, freqs):
        if len(freqs) != GRADE_MAX_TENTHS:
            raise ValueError(f"gpa_distribution needs {GRADE_MAX_TENTHS} frequencies, got {len(freqs)}")
        if any(f < 0 for f in freqs):
            raise ValueError("gpa_distribution frequencies must be nonnegative")
        if abs(sum(freqs) - 1.0) > 1e-9:
            raise ValueError(f"gpa_distribution must sum to 1, got {sum(freqs):.12f}")
        return freqs

    @model_validator(mode="after")
    def _check_ranges(self) -> "SyntheticConfig":
        for name in ("enrollment_range", "sections_range", "tenured_per_term"):
            low, high = getattr(self, name)
            if low < 1 or low > high:
                raise ValueError(f"{name} must satisfy 1 <= low <= high, got {(low, high)}")
        if self.enrollment_range[0] < self.sections_range[1]:
            raise ValueError("minimum enrollment must be at least the maximum section count")
        if self.tenured_per_term[1] > self.tenured_pool:
            raise ValueError("tenured_per_term exceeds the tenured pool")
        if self.sections_range[1] - min(self.tenured_per_term[0], self.sections_range[1]) > self.adjunct_pool:
            raise ValueError("adjunct pool too small to staff the largest term")
        return self


def load_synthetic_config(file_path: Union[str, Path]) -> SyntheticConfig:
    """Read a SyntheticConfig from its JSON document."""
    return SyntheticConfig.model_validate_json(Path(file_path).read_text(encoding="utf-8"))


def _apportion(total: int, weights: np.ndarray) -> np.ndarray:
    """Largest-remainder split of `total` proportional to `weights`."""
    quotas = total * weights / weights.sum()
    counts = np.floor(quotas).astype(np.int64)
    remainder = total - int(counts.sum())
    order = np.argsort(-(quotas - counts), kind="stable")
    counts[order[:remainder]] += 1
    return counts


def _instructor_skills(
    course: str, config: SyntheticConfig, rng: np.random.Generator
) -> Tuple[List[str], List[str], Dict[str, np.ndarray]]:
    tenured = [f"{course}-T{i:02d}" for i in range(1, config.tenured_pool + 1)]
    adjunct = [f"{course}-A{i:02d}" for i in range(1, config.adjunct_pool + 1)]
    spread = config.skill_spread
    skills = {
        instructor: rng.uniform(-spread, spread, SKILL_BANDS)
        for instructor in tenured + adjunct
    }
    return tenured, adjunct, skills


def _generate_term(
    course: str,
    term: Tuple[int, int],
    config: SyntheticConfig,
    pools: Tuple[List[str], List[str], Dict[str, np.ndarray]],
    rng: np.random.Generator,
) -> List[EnrollmentRecord]:
    year, semester = term
    tenured_pool, adjunct_pool, skills = pools

    ne = int(rng.integers(config.enrollment_range[0], config.enrollment_range[1] + 1))
    ns = int(rng.integers(config.sections_range[0], config.sections_range[1] + 1))
    nt = min(int(rng.integers(config.tenured_per_term[0], config.tenured_per_term[1] + 1)), ns)

    staff = list(rng.choice(tenured_pool, size=nt, replace=False))
    staff += list(rng.choice(adjunct_pool, size=ns - nt, replace=False))
    staff = [str(staff[i]) for i in rng.permutation(ns)]
    tenured_set = set(tenured_pool)

    sizes = _apportion(ne, rng.uniform(0.6, 1.4, ns))
    capacities = sizes + rng.integers(0, 6, ns)

    gpa_tenths = rng.choice(np.arange(1, GRADE_MAX_TENTHS + 1), size=ne, p=config.gpa_distribution)
    sections = rng.permutation(np.repeat(np.arange(ns), sizes))

    bands = np.minimum((gpa_tenths - 1) // 10, SKILL_BANDS - 1)
    offsets = np.array([skills[staff[s]][b] for s, b in zip(sections, bands)])
    model = config.grade_model
    latent = model.intercept + model.slope * gpa_tenths / 10 + offsets + rng.normal(0.0, model.noise, ne)
    grade_tenths = np.clip(np.rint(latent * 10), 0, GRADE_MAX_TENTHS).astype(np.int64)

    cancelled = rng.random(ne) < config.cancel_rate
    grade_tenths[cancelled] = 0
    academic_age = rng.integers(0, 6, ne)
    age = 17 + academic_age + rng.integers(0, 4, ne)
    gender = rng.integers(0, 2, ne)
    attempts = 1 + rng.poisson(0.7, ne)
    cancellations = rng.poisson(0.3, ne)

    records = []
    for n in range(ne):
        section = int(sections[n])
        instructor = staff[section]
        records.append(
            EnrollmentRecord(
                student_id=f"S{year}{semester}{n + 1:05d}",
                course=course,
                year=year,
                semester=semester,
                grade_tenths=int(grade_tenths[n]),
                gpa_tenths=int(gpa_tenths[n]),
                passed=bool(grade_tenths[n] >= PASS_GRADE_TENTHS),
                age=int(age[n]),
                academic_age=int(academic_age[n]),
                gender=int(gender[n]),
                attempts=int(attempts[n]),
                cancellations=int(cancellations[n]),
                cancelled=bool(cancelled[n]),
                section=section + 1,
                section_capacity=int(capacities[section]),
                enrolled_count=int(sizes[section]),
                instructor_id=instructor,
                tenured=instructor in tenured_set,
            )
        )
    return records


def generate_synthetic(config: SyntheticConfig) -> DatasetHandle:
    """
    Generate a synthetic corpus.

    Each course gets its own instructor pools with per-band skill offsets drawn
    once; each (course, term) consumes an independent child stream of the seed,
    so the output depends only on the config.

    Args:
        config: Validated synthetic configuration

    Returns:
        DatasetHandle with Synthetic provenance, ordered by course then term
    """
    root = np.random.SeedSequence(config.seed)
    course_streams = root.spawn(len(config.courses))

    records: List[EnrollmentRecord] = []
    for course, course_seq in zip(config.courses, course_streams):
        skill_seq, *term_seqs = course_seq.spawn(1 + len(config.terms))
        pools = _instructor_skills(course, config, np.random.default_rng(skill_seq))
        for term, term_seq in zip(config.terms, term_seqs):
            records.extend(_generate_term(course, term, config, pools, np.random.default_rng(term_seq)))

    logger.info(
        "Generated %d synthetic records (%d courses, %d terms, seed %d)",
        len(records), len(config.courses), len(config.terms), config.seed,
    )
    return DatasetHandle(tuple(records), Provenance.SYNTHETIC)
