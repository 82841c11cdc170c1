"""
Monte Carlo simulation of random semesters.

One run draws a single random semester (plan, group matrix, NT) and estimates the
performance tables on its segmentation. Every iteration then staffs the sections
with a random instructor list, solves the chosen problem and records the
enhancement over a random draw (rho) and over the closed-form expectation (gamma).
Running (Cesaro) means of both are tracked.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from passrate_app.config import (
    CONVERGENCE_TOL,
    CONVERGENCE_WINDOW,
    COST_SCALE,
    DEFAULT_ITERATIONS,
    DEFAULT_MIN_OBS,
    FINE_COST_SCALE,
    NORMALIZATION_GAP_TOL,
)
from passrate_app.dataset import DatasetHandle
from passrate_app.errors import InsufficientInstructorsError, OutOfRangeError
from passrate_app.expectations import (
    AssignmentSampler,
    draw_baseline,
    expected_ia,
    expected_sa,
    group_matrix_of,
    normalize,
    sa_value_of,
)
from passrate_app.models import ApvKind, GroupAssignmentMatrix, Method, choice_matrix
from passrate_app.performance import PerformanceTable, estimate, performance_matrix
from passrate_app.randomization import RandomSemester, RandomSemesterConfig, draw_assignment, generate_random_semester
from passrate_app.rng import derive_seed
from passrate_app.solvers import solve_ia, solve_sa

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MonteCarloSample:
    """One iteration: optimum v, random draw X, expectation E and both enhancements."""
    n: int
    v: float
    baseline: float
    expected: float
    rho: float
    gamma: float


@dataclass
class CesaroTracker:
    """Running sums and prefix means of rho and gamma."""
    count: int = 0
    sum_rho: float = 0.0
    sum_gamma: float = 0.0
    mean_rho_series: List[float] = field(default_factory=list)
    mean_gamma_series: List[float] = field(default_factory=list)

    def add(self, sample: MonteCarloSample) -> None:
        self.count += 1
        self.sum_rho += sample.rho
        self.sum_gamma += sample.gamma
        self.mean_rho_series.append(self.sum_rho / self.count)
        self.mean_gamma_series.append(self.sum_gamma / self.count)

    @property
    def mean_rho(self) -> float:
        return self.sum_rho / self.count

    @property
    def mean_gamma(self) -> float:
        return self.sum_gamma / self.count


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Samples of one run together with the semester they were drawn on."""
    method: Method
    apv_kind: ApvKind
    semester: RandomSemester
    nt: int
    table: PerformanceTable
    samples: List[MonteCarloSample]
    tracker: CesaroTracker

    def converged(self, window: int = CONVERGENCE_WINDOW, tol: float = CONVERGENCE_TOL) -> bool:
        return convergence_check(self.tracker.mean_gamma_series, window, tol)


@dataclass(frozen=True)
class ExperimentSummary:
    """One simulation of a multi-experiment study."""
    experiment: int
    seed: int
    ne: int
    sections: int
    nt: int
    mean_rho: float
    mean_gamma: float
    converged: bool


def cesaro_series(samples: Sequence[float]) -> List[float]:
    """Prefix means (Z_1 + ... + Z_n) / n."""
    values = np.asarray(samples, dtype=float)
    if values.size == 0:
        raise OutOfRangeError("Cesaro series needs at least one sample")
    return (np.cumsum(values) / np.arange(1, values.size + 1)).tolist()


def convergence_check(series: Sequence[float], window: int, tol: float) -> bool:
    """
    True when the last `window` running means vary by at most `tol`.

    Raises:
        OutOfRangeError: If window is not in 1..len(series)
    """
    if window < 1 or window > len(series):
        raise OutOfRangeError(f"window {window} outside 1..{len(series)}")
    tail = np.asarray(series[-window:], dtype=float)
    return bool(tail.max() - tail.min() <= tol)


def _pick_staff(
    tenured: Sequence[str], adjunct: Sequence[str], nt: int, sections: int, rng: np.random.Generator
) -> List[str]:
    chosen = [tenured[i] for i in rng.choice(len(tenured), size=nt, replace=False)]
    chosen += [adjunct[i] for i in rng.choice(len(adjunct), size=sections - nt, replace=False)]
    return [chosen[i] for i in rng.permutation(sections)]


def solve_sa_above(
    T: np.ndarray,
    G: GroupAssignmentMatrix,
    incumbent: GroupAssignmentMatrix,
    floor: float,
    cost_scale: int = COST_SCALE,
) -> float:
    """
    SA optimum on the margins of G, never reported below a known lower bound.

    The expectation over random assignments is a mean of feasible values, so the
    true optimum is at least `floor`. A scaled flow that lands below it lost the
    difference to cost rounding and is solved again on FINE_COST_SCALE costs, where
    the remaining loss is under the zero-enhancement tolerance of `normalize`.
    """
    value = solve_sa(T, G.populations, G.capacities, cost_scale=cost_scale, incumbent=incumbent).value
    if value < floor and cost_scale < FINE_COST_SCALE:
        logger.debug("Scaled SA optimum %.9f below expectation %.9f; re-solving", value, floor)
        value = solve_sa(T, G.populations, G.capacities, cost_scale=FINE_COST_SCALE, incumbent=incumbent).value
    return value


def _iteration(
    n: int,
    method: Method,
    semester: RandomSemester,
    table: PerformanceTable,
    pools,
    nt: int,
    rng: np.random.Generator,
) -> MonteCarloSample:
    tenured, adjunct = pools
    staff = _pick_staff(tenured, adjunct, nt, semester.plan.J, rng)
    T = performance_matrix(table, staff)

    if method is Method.IA:
        C = choice_matrix(T, semester.G)
        v = solve_ia(C, certify=False).value
        baseline = draw_baseline(AssignmentSampler.for_ia(C), rng)
        expected = expected_ia(C)
    else:
        omega = draw_assignment(semester.capacities, rng)
        G_omega = group_matrix_of(semester.classes, omega, semester.scheme.L, semester.plan.J)
        baseline = sa_value_of(T, None, G_omega)
        G = semester.G
        expected = expected_sa(T, G.populations, G.capacities)
        v = solve_sa_above(T, G, G_omega, expected)

    return MonteCarloSample(
        n=n,
        v=v,
        baseline=baseline,
        expected=expected,
        rho=normalize(v, baseline),
        gamma=normalize(v, expected),
    )


def run_simulation(
    config: RandomSemesterConfig,
    course: str,
    method: Method,
    apv: ApvKind,
    iterations: int = DEFAULT_ITERATIONS,
    dataset: Optional[DatasetHandle] = None,
    seed: Optional[int] = None,
    min_obs: int = DEFAULT_MIN_OBS,
    threads: Optional[int] = None,
) -> SimulationResult:
    """
    Run one Monte Carlo simulation.

    The seed (config.seed when omitted) is split into a semester stream and one
    child stream per iteration, so concurrent and sequential execution give
    identical samples.

    Args:
        config: Randomization intervals
        course: Course whose instructors staff the sections
        method: IA or SA
        apv: Grade or pass indicator
        iterations: Number of instructor redraws NI
        dataset: Historical records for the performance tables
        seed: Root seed
        min_obs: Personal-mean threshold for profiles
        threads: Worker threads (None lets the executor decide)

    Returns:
        SimulationResult

    Raises:
        InsufficientInstructorsError: If the pools cannot staff the semester
    """
    if iterations < 1:
        raise OutOfRangeError(f"iterations must be positive, got {iterations}")
    if dataset is None:
        raise OutOfRangeError("a dataset is required to estimate instructor performance")
    method, apv = Method(method), ApvKind(apv)
    seed = config.seed if seed is None else seed

    semester_seq, iteration_seq = np.random.SeedSequence(seed).spawn(2)
    semester = generate_random_semester(config, np.random.default_rng(semester_seq))
    table = estimate(dataset, course, semester.scheme, apv, min_obs=min_obs)

    tenured = table.instructors(tenured=True)
    adjunct = table.instructors(tenured=False)
    sections = semester.plan.J
    nt = min(semester.nt, len(tenured))
    if nt < semester.nt:
        logger.warning("Only %d tenured instructors available; NT lowered from %d", nt, semester.nt)
    if sections - nt > len(adjunct):
        raise InsufficientInstructorsError(
            f"{sections} sections need {sections - nt} adjunct instructors, {course} has {len(adjunct)}"
        )

    streams = [np.random.default_rng(child) for child in iteration_seq.spawn(iterations)]

    def run(n: int) -> MonteCarloSample:
        return _iteration(n + 1, method, semester, table, (tenured, adjunct), nt, streams[n])

    with ThreadPoolExecutor(max_workers=threads) as pool:
        samples = list(pool.map(run, range(iterations)))

    tracker = CesaroTracker()
    for sample in samples:
        tracker.add(sample)

    gap = abs(tracker.mean_rho - tracker.mean_gamma)
    if gap >= NORMALIZATION_GAP_TOL:
        logger.warning("Cesaro means of rho and gamma differ by %.3f percentage points", gap)
    logger.info(
        "Simulation %s/%s: J=%d NT=%d mean rho=%.4f mean gamma=%.4f",
        method.value, apv.value, sections, nt, tracker.mean_rho, tracker.mean_gamma,
    )
    return SimulationResult(
        method=method,
        apv_kind=apv,
        semester=semester,
        nt=nt,
        table=table,
        samples=samples,
        tracker=tracker,
    )


def run_experiments(
    config: RandomSemesterConfig,
    course: str,
    method: Method,
    apv: ApvKind,
    dataset: DatasetHandle,
    experiments: int,
    iterations: int = DEFAULT_ITERATIONS,
    seed: Optional[int] = None,
    min_obs: int = DEFAULT_MIN_OBS,
    threads: Optional[int] = None,
    window: int = CONVERGENCE_WINDOW,
    tol: float = CONVERGENCE_TOL,
) -> List[ExperimentSummary]:
    """Independent simulations, each on a fresh (NS, G, NT) triple from a derived seed."""
    if experiments < 1:
        raise OutOfRangeError(f"experiments must be positive, got {experiments}")
    seed = config.seed if seed is None else seed

    summaries = []
    for k in range(experiments):
        child_seed = derive_seed(seed, k)
        result = run_simulation(
            config, course, method, apv,
            iterations=iterations, dataset=dataset, seed=child_seed,
            min_obs=min_obs, threads=threads,
        )
        summaries.append(
            ExperimentSummary(
                experiment=k + 1,
                seed=child_seed,
                ne=result.semester.ne,
                sections=result.semester.plan.J,
                nt=result.nt,
                mean_rho=result.tracker.mean_rho,
                mean_gamma=result.tracker.mean_gamma,
                converged=result.converged(min(window, iterations), tol),
            )
        )
    return summaries
