"""
Tests for the passrate command line.
"""
import json

import pytest

from passrate_app.cli import main


def _run(*argv):
    return main([str(a) for a in argv])


def test_help_exits_zero():
    """--help is a successful exit."""
    assert _run("segment", "--help") == 0


def test_no_command_is_usage_error():
    """A bare invocation prints help and fails."""
    assert _run() == 2


def test_missing_course_is_usage_error(sample_path):
    """assess needs --course."""
    assert _run("assess", "--data", sample_path) == 2


def test_age_weight_requires_ia(sample_path, tmp_path):
    """Age blending with the student method is rejected by the parser."""
    assert _run("assess", "--data", sample_path, "--course", "DC", "--method", "sa",
                "--age-weight", "--out", tmp_path) == 2


def test_semester_requires_year_for_assess(sample_path, tmp_path):
    """A semester without a year would silently assess every term."""
    assert _run("assess", "--data", sample_path, "--course", "DC", "--semester", 1, "--out", tmp_path) == 2
    assert not (tmp_path / "assessment.csv").exists()


def test_missing_data_file(tmp_path):
    """An unreadable dataset is a runtime error."""
    assert _run("correlate", "--data", tmp_path / "missing.csv", "--out", tmp_path) == 1


def test_full_pipeline(sample_path, tmp_path):
    """Every subcommand on the bundled sample."""
    common = ("--data", sample_path)
    synthetic = sample_path.parent / "synthetic_small.json"
    steps = {
        "gen-synthetic": (["gen-synthetic", "--synthetic", synthetic, "--seed", 3], ["enrollments.csv"]),
        "correlate": (["correlate", *common], ["correlations.csv", "binary_correlations.csv", "course_summary.csv"]),
        "segment": (["segment", *common, "--course", "DC"], ["segments.csv"]),
        "performance": (["performance", *common, "--course", "DC", "--min-obs", 5], ["performance.csv"]),
        "assess": (["assess", *common, "--course", "DC", "--method", "ia", "--age-weight", "--min-obs", 5],
                   ["assessment.csv"]),
        "gen-semester": (["gen-semester", *common, "--course", "DC", "--from-data", "--seed", 4],
                         ["section_plan.csv", "group_matrix.csv", "semester_config.json"]),
        "simulate": (["simulate", *common, "--course", "DC", "--from-data", "--min-obs", 5,
                      "--iterations", 20, "--seed", 7, "--threads", 2],
                     ["samples.csv", "cesaro.csv", "summary.csv"]),
    }
    for name, (argv, outputs) in steps.items():
        out = tmp_path / name
        assert _run(*argv, "--out", out) == 0, name
        for output in outputs:
            assert (out / output).is_file(), f"{name}: {output}"
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["subcommand"] == name
        assert manifest["outputs"] == outputs


def test_assess_single_term(sample_path, tmp_path):
    """One term gives one row plus the mean row."""
    assert _run("assess", "--data", sample_path, "--course", "DC", "--year", 2015, "--semester", 1,
                "--min-obs", 5, "--out", tmp_path) == 0
    lines = (tmp_path / "assessment.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "year,semester,rho"
    assert lines[1].startswith("2015,1,")
    assert lines[-1].startswith("mean,,")
    assert len(lines) == 3


def test_simulate_is_reproducible(sample_path, tmp_path):
    """Same seed, byte-identical samples."""
    argv = ["simulate", "--data", sample_path, "--course", "DC", "--from-data", "--min-obs", 5,
            "--iterations", 15, "--seed", 11]
    assert _run(*argv, "--threads", 1, "--out", tmp_path / "a") == 0
    assert _run(*argv, "--threads", 3, "--out", tmp_path / "b") == 0
    first = (tmp_path / "a" / "samples.csv").read_bytes()
    second = (tmp_path / "b" / "samples.csv").read_bytes()
    assert first == second
    assert first.startswith(b"n,v,rho,gamma\n")


def test_simulate_experiments(sample_path, tmp_path):
    """--experiments writes one row per experiment and a mean row."""
    assert _run("simulate", "--data", sample_path, "--course", "DC", "--from-data", "--min-obs", 5,
                "--iterations", 10, "--experiments", 2, "--window", 5, "--seed", 1, "--out", tmp_path) == 0
    lines = (tmp_path / "experiments.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("experiment,seed,ne,sections,nt,mean_rho,mean_gamma,converged")
    assert len(lines) == 4


def test_manifest_records_seed_and_fingerprint(sample_path, sample_data, tmp_path):
    """The manifest carries parameters, the seed and the dataset fingerprint."""
    assert _run("gen-semester", "--data", sample_path, "--from-data", "--seed", 21, "--out", tmp_path) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["seed"] == 21
    assert manifest["dataset_fingerprint"] == sample_data.fingerprint
    assert manifest["parameters"]["course"] == "DC"
    assert "threads" not in manifest["parameters"]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
