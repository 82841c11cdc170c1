"""
Command-line interface for the pass rate optimization toolkit.
Provides commands for data generation, diagnostics, historical assessment and simulation.
"""
import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from passrate_app.assessment import assess_history, assess_term, mean_rho
from passrate_app.config import (
    CONVERGENCE_WINDOW,
    DEFAULT_BLEND_WEIGHT,
    DEFAULT_ITERATIONS,
    DEFAULT_MIN_OBS,
    LOG_LEVEL,
    REFERENCE_ENHANCEMENTS,
    REFERENCE_SIMULATIONS,
    REPORTS_DIR,
    SAMPLE_DATASET,
)
from passrate_app.dataset import DatasetHandle, filter_dataset
from passrate_app.errors import EmptyTermError, PassRateError
from passrate_app.loaders import (
    SyntheticConfig,
    generate_synthetic,
    load_dataset,
    load_synthetic_config,
    write_dataset,
)
from passrate_app.models import ApvKind, Method
from passrate_app.montecarlo import ExperimentSummary, run_experiments, run_simulation
from passrate_app.performance import estimate
from passrate_app.randomization import (
    estimate_semester_config,
    generate_random_semester,
    reference_semester_config,
)
from passrate_app.reports import (
    RunManifest,
    write_binary_correlations,
    write_cesaro,
    write_correlation,
    write_enhancements,
    write_experiments,
    write_frame,
    write_group_matrix,
    write_manifest,
    write_performance,
    write_samples,
    write_section_plan,
    write_segments,
)
from passrate_app.rng import entropy_seed, get_rng
from passrate_app.segmentation import segment, segment_populations
from passrate_app.stats import (
    BINARY_FACTORS,
    QUANTITATIVE_FACTORS,
    binary_correlations,
    correlation_matrix,
    course_summary,
)

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def _load_data(args) -> DatasetHandle:
    """Dataset selected by --synthetic, --data, or the bundled sample."""
    if args.synthetic:
        print(f"🧪 Generating synthetic data from {args.synthetic}")
        return generate_synthetic(load_synthetic_config(args.synthetic))
    path = Path(args.data) if args.data else SAMPLE_DATASET
    print(f"📂 Loading {path}")
    return load_dataset(path)


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else REPORTS_DIR / args.command
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = entropy_seed()
    print(f"🎲 No --seed given, using {seed}")
    return seed


def _finish(args, out: Path, outputs: List[Path], seed: Optional[int] = None,
            fingerprint: Optional[str] = None) -> int:
    parameters = {
        key: (str(value) if isinstance(value, Path) else value)
        for key, value in sorted(vars(args).items())
        if key not in ("func", "command", "verbose", "threads")
    }
    manifest = RunManifest(
        subcommand=args.command,
        parameters=parameters,
        seed=seed,
        dataset_fingerprint=fingerprint,
        outputs=[path.name for path in outputs],
    )
    write_manifest(manifest, out / MANIFEST_NAME)
    print(f"\n💾 Outputs saved to: {out}")
    for path in outputs:
        print(f"   - {path.name}")
    return 0


def cmd_gen_synthetic(args):
    """Generate a synthetic enrollment corpus."""
    config = load_synthetic_config(args.synthetic) if args.synthetic else SyntheticConfig()
    seed = args.seed if args.seed is not None else (config.seed if args.synthetic else _resolve_seed(args))
    config = config.model_copy(update={"seed": seed})

    print(f"🚀 Generating {len(config.terms)} terms for {', '.join(config.courses)} (seed {seed})...")
    data = generate_synthetic(config)
    out = _out_dir(args)
    path = write_dataset(data, out / "enrollments.csv")
    print(f"✅ {len(data)} registrations written")
    return _finish(args, out, [path], seed=seed, fingerprint=data.fingerprint)


def cmd_correlate(args):
    """Correlation tables and per-course averages."""
    data = _load_data(args)
    if args.course:
        data = filter_dataset(data, args.course)
    frame = data.completed
    print(f"📊 Correlating {len(frame)} completed registrations...\n")

    report = correlation_matrix(frame, QUANTITATIVE_FACTORS + BINARY_FACTORS)
    pairs = {
        "pass": binary_correlations(frame, "pass", QUANTITATIVE_FACTORS),
        "gender": binary_correlations(frame, "gender", ("grade", "pass", "gpa")),
    }
    summary = course_summary(frame)

    print("=" * 80)
    print("📈 CORRELATION WITH PASS/FAIL")
    print("=" * 80)
    for name, value in pairs["pass"].items():
        print(f"   {name:<18} {value:+.4f}")

    out = _out_dir(args)
    outputs = [
        write_correlation(report, out / "correlations.csv"),
        write_binary_correlations(pairs, out / "binary_correlations.csv"),
        write_frame(summary, out / "course_summary.csv"),
    ]
    return _finish(args, out, outputs, fingerprint=data.fingerprint)


def _term_values(data: DatasetHandle, args, variable: str):
    values = filter_dataset(data, args.course, args.year, args.semester).completed[variable]
    if values.empty:
        raise EmptyTermError(f"no completed registrations for {args.course} matching the filters")
    return values.to_numpy()


def _scheme_for(values, variable: str):
    if variable == "gpa":
        return segment(values)
    lower, upper = float(values.min()), float(values.max())
    return segment(values, lower=lower, upper=max(upper, lower + 1.0))


def cmd_segment(args):
    """Decile segmentation of GPA (or age)."""
    data = _load_data(args)
    values = _term_values(data, args, args.variable)
    scheme = _scheme_for(values, args.variable)
    populations = segment_populations(scheme, values)

    print(f"✂️  {scheme.L} segments over {len(values)} students\n")
    for index, population in enumerate(populations):
        print(f"   {index + 1:>2}. {scheme.label(index):<14} {population:>6}")

    out = _out_dir(args)
    path = write_segments(scheme, populations, out / "segments.csv")
    return _finish(args, out, [path], fingerprint=data.fingerprint)


def cmd_performance(args):
    """Instructor performance profiles per GPA segment."""
    data = _load_data(args)
    scheme = segment(_term_values(data, args, "gpa"))
    table = estimate(data, args.course, scheme, ApvKind(args.apv), min_obs=args.min_obs)

    tenured = table.instructors(tenured=True)
    adjunct = table.instructors(tenured=False)
    print(f"👩‍🏫 {len(tenured)} tenured and {len(adjunct)} adjunct instructors profiled for {args.course}")

    out = _out_dir(args)
    path = write_performance(table, out / "performance.csv")
    return _finish(args, out, [path], fingerprint=data.fingerprint)


def cmd_assess(args):
    """Optimize historical terms and report relative enhancements."""
    data = _load_data(args)
    apv, method = ApvKind(args.apv), Method(args.method)
    print(f"🔍 Assessing {args.course} ({method.value.upper()}, {apv.value})...\n")

    if args.year is not None and args.semester is not None:
        records = [assess_term(
            data, args.course, args.year, args.semester, apv, method,
            min_obs=args.min_obs, holdout=args.holdout, age_weight=args.age_weight,
        )]
    else:
        records = assess_history(
            data, args.course, apv, method,
            min_obs=args.min_obs, holdout=args.holdout,
            threads=args.threads, age_weight=args.age_weight,
        )
        if args.year is not None:
            records = [r for r in records if r.year == args.year]

    if not records:
        raise EmptyTermError(f"no assessable terms for {args.course}")

    print("=" * 80)
    print("📝 RELATIVE ENHANCEMENTS")
    print("=" * 80)
    for record in records:
        print(f"   {record.year}-{record.semester}  rho = {record.rho:8.4f}%  (J={record.sections}, N={record.students})")
    print(f"\n   Mean rho: {mean_rho(records):.4f}%")
    reference = REFERENCE_ENHANCEMENTS.get((args.course, apv.value, method.value))
    if reference is not None:
        print(f"   Reference institutional mean: {reference:.4f}%")

    out = _out_dir(args)
    path = write_enhancements(records, out / "assessment.csv")
    return _finish(args, out, [path], fingerprint=data.fingerprint)


def _semester_config(args, seed: int):
    if args.from_data:
        data = _load_data(args)
        return estimate_semester_config(data, args.course, seed=seed), data
    return reference_semester_config(seed), None


def cmd_gen_semester(args):
    """Draw one random semester."""
    seed = _resolve_seed(args)
    config, data = _semester_config(args, seed)
    semester = generate_random_semester(config, get_rng(seed))

    print(f"🎓 NE={semester.ne} NS={semester.ns} J={semester.plan.J} NT={semester.nt}")
    print(f"   Capacity fit residuals: {semester.plan.df1}, {semester.plan.df2}, {semester.plan.df3}")

    out = _out_dir(args)
    config_path = out / "semester_config.json"
    config_path.write_text(config.model_dump_json(indent=2) + "\n", encoding="utf-8")
    outputs = [
        write_section_plan(semester, out / "section_plan.csv"),
        write_group_matrix(semester.G, semester.scheme, out / "group_matrix.csv"),
        config_path,
    ]
    return _finish(args, out, outputs, seed=seed, fingerprint=data.fingerprint if data else None)


def cmd_simulate(args):
    """Monte Carlo simulation of random semesters."""
    seed = _resolve_seed(args)
    apv, method = ApvKind(args.apv), Method(args.method)
    if args.from_data:
        config, data = _semester_config(args, seed)
    else:
        data = _load_data(args)
        config = reference_semester_config(seed)
    out = _out_dir(args)

    print(f"🎰 Simulating {args.course} ({method.value.upper()}, {apv.value}), "
          f"{args.experiments} x {args.iterations} iterations...\n")

    if args.experiments > 1:
        summaries = run_experiments(
            config, args.course, method, apv, data,
            experiments=args.experiments, iterations=args.iterations,
            seed=seed, min_obs=args.min_obs, threads=args.threads,
            window=args.window,
        )
        outputs = [write_experiments(summaries, out / "experiments.csv")]
    else:
        result = run_simulation(
            config, args.course, method, apv,
            iterations=args.iterations, dataset=data, seed=seed,
            min_obs=args.min_obs, threads=args.threads,
        )
        summaries = [
            ExperimentSummary(
                experiment=1,
                seed=seed,
                ne=result.semester.ne,
                sections=result.semester.plan.J,
                nt=result.nt,
                mean_rho=result.tracker.mean_rho,
                mean_gamma=result.tracker.mean_gamma,
                converged=result.converged(min(args.window, args.iterations)),
            )
        ]
        outputs = [
            write_samples(result.samples, out / "samples.csv"),
            write_cesaro(result.tracker, out / "cesaro.csv"),
            write_experiments(summaries, out / "summary.csv"),
        ]

    print("=" * 80)
    print("📊 MONTE CARLO SUMMARY")
    print("=" * 80)
    for s in summaries:
        flag = "✅" if s.converged else "⚠️ "
        print(f"   {flag} #{s.experiment}: NE={s.ne} J={s.sections} NT={s.nt} "
              f"mean rho={s.mean_rho:.4f}% mean gamma={s.mean_gamma:.4f}%")
    reference = REFERENCE_SIMULATIONS.get((args.course, method.value))
    if reference is not None:
        print(f"   Reference institutional means: rho={reference['rho']:.4f}% gamma={reference['gamma']:.4f}%")

    return _finish(args, out, outputs, seed=seed, fingerprint=data.fingerprint)


def _add_data_args(parser):
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--data", type=str, help=f"Enrollment CSV (default: {SAMPLE_DATASET.name})")
    source.add_argument("--synthetic", type=str, help="Synthetic corpus config (JSON)")


def _add_term_args(parser, course_required: bool):
    parser.add_argument("--course", type=str, required=course_required, help="Course code, e.g. DC")
    parser.add_argument("--year", type=int, help="Restrict to one year")
    parser.add_argument("--semester", type=int, choices=(1, 2), help="Restrict to one semester")


def _add_model_args(parser):
    parser.add_argument("--apv", choices=[k.value for k in ApvKind], default="pass",
                        help="Academic performance variable (default: pass)")
    parser.add_argument("--method", choices=[m.value for m in Method], default="sa",
                        help="Instructor (ia) or student (sa) assignment (default: sa)")
    parser.add_argument("--min-obs", type=int, default=DEFAULT_MIN_OBS,
                        help=f"Observations needed for a personal mean (default: {DEFAULT_MIN_OBS})")


def _add_common_args(parser, seeded: bool = False, threaded: bool = False):
    parser.add_argument("--out", type=str, help="Output directory (default: reports/<command>)")
    if seeded:
        parser.add_argument("--seed", type=int, help="Random seed (default: fresh entropy, recorded in the manifest)")
    if threaded:
        parser.add_argument("--threads", type=int, default=os.cpu_count(),
                            help="Worker threads (default: available cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="passrate",
        description="Pass rate optimization - optimal instructor and student assignment in multi-section courses",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # gen-synthetic
    p = subparsers.add_parser("gen-synthetic", help="Generate a synthetic enrollment corpus")
    p.add_argument("--synthetic", type=str, help="Synthetic corpus config (JSON)")
    _add_common_args(p, seeded=True)
    p.set_defaults(func=cmd_gen_synthetic)

    # correlate
    p = subparsers.add_parser("correlate", help="Correlation tables and course averages")
    _add_data_args(p)
    p.add_argument("--course", type=str, help="Restrict to one course")
    _add_common_args(p)
    p.set_defaults(func=cmd_correlate)

    # segment
    p = subparsers.add_parser("segment", help="Decile segmentation of GPA or age")
    _add_data_args(p)
    _add_term_args(p, course_required=True)
    p.add_argument("--variable", choices=("gpa", "age"), default="gpa", help="Segmentation variable")
    _add_common_args(p)
    p.set_defaults(func=cmd_segment)

    # performance
    p = subparsers.add_parser("performance", help="Instructor performance profiles")
    _add_data_args(p)
    _add_term_args(p, course_required=True)
    p.add_argument("--apv", choices=[k.value for k in ApvKind], default="pass",
                   help="Academic performance variable (default: pass)")
    p.add_argument("--min-obs", type=int, default=DEFAULT_MIN_OBS,
                   help=f"Observations needed for a personal mean (default: {DEFAULT_MIN_OBS})")
    _add_common_args(p)
    p.set_defaults(func=cmd_performance)

    # assess
    p = subparsers.add_parser("assess", help="Optimize historical terms")
    _add_data_args(p)
    _add_term_args(p, course_required=True)
    _add_model_args(p)
    p.add_argument("--holdout", action="store_true", help="Estimate profiles without the assessed term")
    p.add_argument("--age-weight", type=float, nargs="?", const=DEFAULT_BLEND_WEIGHT,
                   help=f"IA only: blend with the age-segmented costs (default weight {DEFAULT_BLEND_WEIGHT})")
    _add_common_args(p, threaded=True)
    p.set_defaults(func=cmd_assess)

    # gen-semester
    p = subparsers.add_parser("gen-semester", help="Draw one random semester")
    _add_data_args(p)
    p.add_argument("--course", type=str, default="DC", help="Course to estimate intervals for (default: DC)")
    p.add_argument("--from-data", action="store_true", help="Estimate intervals from the dataset instead of the DC tables")
    _add_common_args(p, seeded=True)
    p.set_defaults(func=cmd_gen_semester)

    # simulate
    p = subparsers.add_parser("simulate", help="Monte Carlo simulation")
    _add_data_args(p)
    p.add_argument("--course", type=str, required=True, help="Course whose instructors staff the sections")
    _add_model_args(p)
    p.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS,
                   help=f"Iterations per simulation (default: {DEFAULT_ITERATIONS})")
    p.add_argument("--experiments", type=int, default=1, help="Independent simulations (default: 1)")
    p.add_argument("--window", type=int, default=CONVERGENCE_WINDOW,
                   help=f"Convergence window (default: {CONVERGENCE_WINDOW})")
    p.add_argument("--from-data", action="store_true", help="Estimate intervals from the dataset instead of the DC tables")
    _add_common_args(p, seeded=True, threaded=True)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_help()
            return 2
        if args.command == "assess" and args.age_weight is not None and args.method != Method.IA.value:
            parser.error("--age-weight applies to --method ia only")
        if args.command == "assess" and args.semester is not None and args.year is None:
            parser.error("--semester requires --year for assess")
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else LOG_LEVEL,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    logger.debug("Running %s", args.command)
    try:
        return args.func(args)
    except (PassRateError, ValidationError, OSError) as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
