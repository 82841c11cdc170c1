"""
Exact solvers for the two assignment problems.

Instructor assignment (IA) is a linear assignment problem on the choice matrix
C = T G and is solved with the Hungarian method. Student assignment (SA) is an
integer transportation problem from L segment supplies to J section demands and
is solved as a min-cost flow on integer-scaled costs.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from ortools.graph.python import min_cost_flow
from scipy.optimize import linear_sum_assignment, linprog

from passrate_app.config import CERTIFY_TOLERANCE, COST_SCALE
from passrate_app.errors import (
    DimensionMismatchError,
    OptimalityCertificateError,
    OutOfRangeError,
    SolverError,
    SumConditionError,
)
from passrate_app.expectations import sa_value_of
from passrate_app.models import GroupAssignmentMatrix, MatrixLike, Permutation, as_array

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IASolution:
    """Optimal instructor permutation: instructor row i teaches section assignment[i]."""
    assignment: Permutation
    value: float
    dual_bound: Optional[float] = None


@dataclass(frozen=True, eq=False)
class SASolution:
    """Optimal group assignment matrix and its global performance."""
    G_opt: GroupAssignmentMatrix
    value: float


def assignment_dual_bound(C: np.ndarray) -> float:
    """
    Optimal value of the dual of the maximization assignment LP.

    min sum(u) + sum(v)  s.t.  u_i + v_j >= C(i, j)
    """
    size = C.shape[0]
    rows, cols = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    constraints = np.zeros((size * size, 2 * size))
    constraints[np.arange(size * size), rows.ravel()] = -1.0
    constraints[np.arange(size * size), size + cols.ravel()] = -1.0
    result = linprog(
        c=np.ones(2 * size),
        A_ub=constraints,
        b_ub=-C.ravel(),
        bounds=[(None, None)] * (2 * size),
        method="highs",
    )
    if result.status != 0:
        raise SolverError(f"assignment dual did not solve: {result.message}")
    return float(result.fun)


def solve_ia(C: MatrixLike, certify: bool = True) -> IASolution:
    """
    Maximize sum_i C(i, sigma(i)) over permutations sigma.

    Args:
        C: Square choice matrix
        certify: Check the primal value against the LP dual bound

    Returns:
        IASolution with the optimal permutation and its value

    Raises:
        DimensionMismatchError: If C is not square
        OptimalityCertificateError: If the duality gap exceeds the tolerance
    """
    c = as_array(C)
    if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] == 0:
        raise DimensionMismatchError(f"instructor assignment needs a nonempty square matrix, got {c.shape}")

    rows, cols = linear_sum_assignment(c, maximize=True)
    sigma = np.empty(c.shape[0], dtype=np.int64)
    sigma[rows] = cols
    value = float(sum(c[i, sigma[i]] for i in range(c.shape[0])))

    dual = None
    if certify:
        dual = assignment_dual_bound(c)
        gap = dual - value
        if abs(gap) > CERTIFY_TOLERANCE * max(1.0, abs(value)):
            raise OptimalityCertificateError(f"duality gap {gap:.3e} on a {c.shape[0]}x{c.shape[0]} instance")
        logger.debug("IA value %.6f certified (gap %.2e)", value, gap)

    return IASolution(Permutation(tuple(sigma)), value, dual)


def _margins(values: Sequence[int], name: str) -> np.ndarray:
    array = np.asarray(values)
    if array.ndim != 1 or array.size == 0:
        raise DimensionMismatchError(f"{name} must be a nonempty vector")
    if not np.all(np.equal(np.mod(array, 1), 0)) or np.any(array < 0):
        raise OutOfRangeError(f"{name} must be nonnegative integers")
    return array.astype(np.int64)


def solve_sa(
    T: MatrixLike,
    p: Sequence[int],
    g: Sequence[int],
    pi: Optional[Permutation] = None,
    cost_scale: int = COST_SCALE,
    incumbent: Optional[GroupAssignmentMatrix] = None,
) -> SASolution:
    """
    Distribute students over sections to maximize sum_j (T G)(pi(j), j).

    Routing one segment-l student to section j gains T(pi(j), l). Gains are turned
    into nonnegative integer costs round((max_gain - gain) * cost_scale); since every
    feasible flow moves exactly N units the constant shift does not change the
    optimum, and integral supplies give an integral optimal G.

    Args:
        T: J x L performance matrix
        p: Segment populations (supplies)
        g: Section capacities (demands)
        pi: Instructor row teaching each section (None for identity)
        cost_scale: Integer scaling of gains
        incumbent: Known feasible matrix with the same margins (e.g. the historical one)

    Returns:
        SASolution with the optimal group assignment matrix and its exact value

    Raises:
        SumConditionError: If sum(p) != sum(g), or the incumbent has other margins
        DimensionMismatchError: If T is not len(g) x len(p)
        SolverError: If the flow solver reports a non-optimal status
    """
    t = as_array(T)
    populations = _margins(p, "segment populations")
    capacities = _margins(g, "section capacities")
    L, J = populations.size, capacities.size
    if t.shape != (J, L):
        raise DimensionMismatchError(f"T has shape {t.shape}, expected ({J}, {L})")
    if populations.sum() != capacities.sum():
        raise SumConditionError(
            f"sum of populations {int(populations.sum())} != sum of capacities {int(capacities.sum())}"
        )
    if incumbent is not None and not (
        np.array_equal(incumbent.populations, populations) and np.array_equal(incumbent.capacities, capacities)
    ):
        raise SumConditionError(
            f"incumbent margins {incumbent.populations.tolist()} / {incumbent.capacities.tolist()} "
            f"differ from {populations.tolist()} / {capacities.tolist()}"
        )
    pi = pi if pi is not None else Permutation.identity(J)

    gain = pi.apply_rows(t).T
    costs = np.rint((gain.max() - gain) * cost_scale).astype(np.int64)

    start_nodes = np.repeat(np.arange(L), J)
    end_nodes = L + np.tile(np.arange(J), L)
    arc_capacities = np.minimum.outer(populations, capacities).ravel()

    smcf = min_cost_flow.SimpleMinCostFlow()
    all_arcs = smcf.add_arcs_with_capacity_and_unit_cost(
        start_nodes, end_nodes, arc_capacities, costs.ravel()
    )
    supplies = np.concatenate([populations, -capacities])
    smcf.set_nodes_supplies(np.arange(L + J), supplies)

    status = smcf.solve()
    if status != smcf.OPTIMAL:
        raise SolverError(f"min cost flow returned status {status}")

    flows = smcf.flows(all_arcs).reshape(L, J)
    G = GroupAssignmentMatrix(flows, populations, capacities)
    value = sa_value_of(t, pi, G)

    # The flow is optimal for the scaled costs; a feasible incumbent can beat it by rounding error only
    if incumbent is not None:
        incumbent_value = sa_value_of(t, pi, incumbent)
        if incumbent_value > value:
            logger.debug("Incumbent beats scaled optimum by %.3e", incumbent_value - value)
            G, value = incumbent, incumbent_value

    logger.debug("SA value %.6f over %d students", value, int(populations.sum()))
    return SASolution(G, value)
