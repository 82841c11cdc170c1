"""
Report writers.
CSV tables for every CLI command plus the JSON run manifest.
"""
import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from passrate_app import __version__
from passrate_app.assessment import EnhancementRecord, mean_rho
from passrate_app.models import GroupAssignmentMatrix
from passrate_app.montecarlo import CesaroTracker, ExperimentSummary, MonteCarloSample
from passrate_app.performance import PerformanceTable
from passrate_app.randomization import CAPACITY_GROUPS, RandomSemester
from passrate_app.segmentation import SegmentationScheme
from passrate_app.stats import CorrelationReport


class RunManifest(BaseModel):
    """Everything needed to reproduce one CLI run."""
    subcommand: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    dataset_fingerprint: Optional[str] = None
    version: str = __version__
    outputs: List[str] = Field(default_factory=list)


def _fmt(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        if np.isnan(value):
            return ""
        return f"{float(value):.6f}"
    if value is None:
        return ""
    return str(value)


def write_rows(file_path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV table in the dataset dialect (UTF-8, comma, '.' decimals, LF)."""
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(value) for value in row])
    return file_path


def write_frame(frame: pd.DataFrame, file_path: Path) -> Path:
    return write_rows(file_path, list(frame.columns), frame.itertuples(index=False, name=None))


def write_correlation(report: CorrelationReport, file_path: Path) -> Path:
    """Square correlation table, first column holding the variable names."""
    rows = [[name, *report.matrix[i]] for i, name in enumerate(report.variables)]
    return write_rows(file_path, ["variable", *report.variables], rows)


def write_binary_correlations(correlations: Dict[str, Dict[str, float]], file_path: Path) -> Path:
    """Long table binary,variable,r_pb."""
    rows = [
        [binary, variable, value]
        for binary, values in correlations.items()
        for variable, value in values.items()
    ]
    return write_rows(file_path, ["binary", "variable", "r_pb"], rows)


def write_segments(scheme: SegmentationScheme, populations: Sequence[int], file_path: Path) -> Path:
    rows = [
        [index + 1, lower, upper, int(populations[index])]
        for index, (lower, upper) in enumerate(scheme.intervals)
    ]
    return write_rows(file_path, ["segment", "lower", "upper", "population"], rows)


def write_performance(table: PerformanceTable, file_path: Path) -> Path:
    return write_frame(table.to_frame(), file_path)


def write_enhancements(records: Sequence[EnhancementRecord], file_path: Path) -> Path:
    """year,semester,rho per term and a trailing mean row."""
    rows: List[List[Any]] = [[r.year, r.semester, r.rho] for r in records]
    rows.append(["mean", "", mean_rho(records)])
    return write_rows(file_path, ["year", "semester", "rho"], rows)


def write_section_plan(semester: RandomSemester, file_path: Path) -> Path:
    """One row per section: capacity group extremes and the fitted capacity."""
    plan = semester.plan
    rows = [
        [j + 1, CAPACITY_GROUPS[group].lower, CAPACITY_GROUPS[group].upper, capacity]
        for j, (group, capacity) in enumerate(zip(plan.groups, plan.capacities))
    ]
    return write_rows(file_path, ["section", "group_lower", "group_upper", "capacity"], rows)


def write_group_matrix(G: GroupAssignmentMatrix, scheme: SegmentationScheme, file_path: Path) -> Path:
    """Segments as rows, sections as columns, with margin totals."""
    header = ["segment", *[f"section_{j + 1}" for j in range(G.J)], "total"]
    rows = [
        [scheme.label(index), *G.entries[index].tolist(), int(G.populations[index])]
        for index in range(G.L)
    ]
    rows.append(["total", *G.capacities.tolist(), G.N])
    return write_rows(file_path, header, rows)


def write_samples(samples: Sequence[MonteCarloSample], file_path: Path) -> Path:
    rows = [[s.n, s.v, s.rho, s.gamma] for s in samples]
    return write_rows(file_path, ["n", "v", "rho", "gamma"], rows)


def write_cesaro(tracker: CesaroTracker, file_path: Path) -> Path:
    rows = [
        [n + 1, rho, gamma]
        for n, (rho, gamma) in enumerate(zip(tracker.mean_rho_series, tracker.mean_gamma_series))
    ]
    return write_rows(file_path, ["n", "mean_rho", "mean_gamma"], rows)


def write_experiments(summaries: Sequence[ExperimentSummary], file_path: Path) -> Path:
    """One row per experiment plus the mean row."""
    header = ["experiment", "seed", "ne", "sections", "nt", "mean_rho", "mean_gamma", "converged"]
    rows: List[List[Any]] = [
        [s.experiment, s.seed, s.ne, s.sections, s.nt, s.mean_rho, s.mean_gamma, s.converged]
        for s in summaries
    ]
    rows.append([
        "mean", "", "", "", "",
        float(np.mean([s.mean_rho for s in summaries])),
        float(np.mean([s.mean_gamma for s in summaries])),
        "",
    ])
    return write_rows(file_path, header, rows)


def write_manifest(manifest: RunManifest, file_path: Path) -> Path:
    """JSON manifest with sorted keys and no timestamps."""
    file_path = Path(file_path)
    file_path.parent.mkdir(parents=True, exist_ok=True)
    with open(file_path, "w", encoding="utf-8") as f:
        json.dump(manifest.model_dump(mode="json"), f, indent=2, sort_keys=True)
        f.write("\n")
    return file_path
