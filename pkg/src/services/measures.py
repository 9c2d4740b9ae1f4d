import logging
import math
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy import sparse
from scipy.optimize import linear_sum_assignment, linprog
from scipy.spatial.distance import cdist
from scipy.stats import wasserstein_distance

from src.conf.config import settings
from src.core.models import ConvergenceTrace, EmpiricalMeasure, MapDescriptor, RnifsSystem, Window
from src.core.rng import Xoshiro256StarStar
from src.exceptions import DomainError, InvalidCap, NoConvergence, SupportTooLarge
from src.repository.artifacts import write_table
from src.repository.maps import apply_rule
from src.services.stability import mean_contraction_factor


logger = logging.getLogger(__name__)


def pushforward(mu: EmpiricalMeasure, m: MapDescriptor) -> EmpiricalMeasure:
    """
    Image measure f#mu: atoms moved through the map, weights untouched.

    :param mu: The measure.
    :type mu: EmpiricalMeasure
    :param m: The map.
    :type m: MapDescriptor
    :return: The pushforward.
    :rtype: EmpiricalMeasure
    """
    u, v = apply_rule(m, mu.support[:, 0], mu.support[:, 1])
    return EmpiricalMeasure(np.column_stack([u, v]), mu.weights)


def systematic_resample(support: np.ndarray, weights: np.ndarray, cap: int, rng: Xoshiro256StarStar) -> EmpiricalMeasure:
    positions = (rng.random() + np.arange(cap)) / cap
    cumulative = np.cumsum(weights)
    cumulative /= cumulative[-1]
    idx = np.minimum(np.searchsorted(cumulative, positions, side="right"), len(weights) - 1)
    return EmpiricalMeasure(support[idx], np.full(cap, 1.0 / cap))


def hutchinson_step(sys: RnifsSystem, mu: EmpiricalMeasure, cap: Optional[int], rng: Xoshiro256StarStar) -> EmpiricalMeasure:
    """
    One application of the Hutchinson operator, W(mu) = sum_i p_i f_i#mu.

    The exact mixture has N * |support| atoms with weights p_i * w_j. When that
    exceeds ``cap`` the mixture is reduced to ``cap`` equally weighted atoms by
    systematic resampling.

    :param sys: The system.
    :type sys: RnifsSystem
    :param mu: Current measure.
    :type mu: EmpiricalMeasure
    :param cap: Largest support kept; None for no limit.
    :type cap: int, optional
    :param rng: Stream used only when resampling happens.
    :type rng: Xoshiro256StarStar
    :return: The next measure.
    :rtype: EmpiricalMeasure
    """
    if cap is not None and cap < 1:
        raise InvalidCap(f"Support cap must be at least 1, got {cap}")

    supports, weights = [], []
    for p, m in zip(sys.probs.p, sys.maps):
        image = pushforward(mu, m)
        supports.append(image.support)
        weights.append(p * image.weights)
    support = np.concatenate(supports)
    weight = np.concatenate(weights)

    if cap is not None and len(weight) > cap:
        return systematic_resample(support, weight, cap, rng)
    return EmpiricalMeasure(support, weight)


def _assignment_cost(a: np.ndarray, b: np.ndarray) -> float:
    cost = cdist(a, b)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].mean())


def _transport_cost(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    m, n = len(mu), len(nu)
    cost = cdist(mu.support, nu.support).ravel()
    # row i: sum_j T[i, j] = a_i ; column j: sum_i T[i, j] = b_j
    rows = sparse.kron(sparse.identity(m), np.ones((1, n)))
    cols = sparse.kron(np.ones((1, m)), sparse.identity(n))
    a_eq = sparse.vstack([rows, cols]).tocsr()[:-1]
    b_eq = np.concatenate([mu.weights, nu.weights])[:-1]
    result = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    if result.status != 0:
        raise DomainError(f"Transport program failed: {result.message}")
    return max(float(result.fun), 0.0)


def wasserstein1_exact(mu: EmpiricalMeasure, nu: EmpiricalMeasure,
                       uniform_limit: Optional[int] = None, weighted_limit: Optional[int] = None) -> float:
    """
    Exact W1 with Euclidean ground cost.

    Uniform measures are replicated to a common size lcm(m, n) and solved as a
    minimum-cost assignment while that size stays within ``uniform_limit``.
    Anything else goes to a dense transportation program while the combined
    support stays within ``weighted_limit``.

    :param mu: First measure.
    :type mu: EmpiricalMeasure
    :param nu: Second measure.
    :type nu: EmpiricalMeasure
    :return: The optimal transport cost.
    :rtype: float
    """
    uniform_limit = settings.exact_uniform_limit if uniform_limit is None else uniform_limit
    weighted_limit = settings.exact_weighted_limit if weighted_limit is None else weighted_limit
    m, n = len(mu), len(nu)

    if mu.is_uniform() and nu.is_uniform():
        common = math.lcm(m, n)
        if common <= uniform_limit:
            return _assignment_cost(np.repeat(mu.support, common // m, axis=0),
                                    np.repeat(nu.support, common // n, axis=0))
    if m + n <= weighted_limit:
        return _transport_cost(mu, nu)
    raise SupportTooLarge(f"Exact W1 refused for supports of size {m} and {n}; use the sliced estimator")


def wasserstein1_sliced(mu: EmpiricalMeasure, nu: EmpiricalMeasure, n_projections: Optional[int] = None,
                        rng: Optional[Xoshiro256StarStar] = None) -> float:
    """
    Sliced W1: mean over random unit directions of the 1D W1 between the projected measures.
    """
    n_projections = settings.sliced_projections if n_projections is None else n_projections
    if n_projections < 1:
        raise DomainError(f"n_projections must be at least 1, got {n_projections}")
    generator = (rng or Xoshiro256StarStar(0)).numpy_generator()
    directions = generator.normal(size=(n_projections, 2))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)

    mu_proj = mu.support @ directions.T
    nu_proj = nu.support @ directions.T
    total = math.fsum(
        wasserstein_distance(mu_proj[:, k], nu_proj[:, k], mu.weights, nu.weights)
        for k in range(n_projections)
    )
    return total / n_projections


def w1_distance(mu: EmpiricalMeasure, nu: EmpiricalMeasure, rng: Xoshiro256StarStar) -> tuple[float, bool]:
    """
    Exact W1 when the supports allow it, sliced W1 otherwise.

    :return: The distance and whether it is exact.
    :rtype: tuple[float, bool]
    """
    try:
        return wasserstein1_exact(mu, nu), True
    except SupportTooLarge:
        return wasserstein1_sliced(mu, nu, rng=rng), False


def iterate_to_invariance(sys: RnifsSystem, mu0: EmpiricalMeasure, tol: Optional[float] = None,
                          max_steps: Optional[int] = None, cap: Optional[int] = None,
                          rng: Optional[Xoshiro256StarStar] = None,
                          window: Optional[Window] = None) -> tuple[EmpiricalMeasure, ConvergenceTrace]:
    """
    Apply the Hutchinson operator until successive iterates are closer than ``tol``.

    :param sys: The system.
    :type sys: RnifsSystem
    :param mu0: Starting measure.
    :type mu0: EmpiricalMeasure
    :param tol: Distance threshold, positive.
    :type tol: float, optional
    :param max_steps: Step budget.
    :type max_steps: int, optional
    :param cap: Support cap passed to each step; None keeps every atom.
    :type cap: int, optional
    :param rng: Stream for resampling and sliced projections.
    :type rng: Xoshiro256StarStar, optional
    :param window: Box over which the Lipschitz constants of the theoretical factor are estimated.
    :type window: Window, optional
    :return: The last iterate and the trace.
    :rtype: tuple[EmpiricalMeasure, ConvergenceTrace]
    """
    tol = settings.invariance_tol if tol is None else tol
    max_steps = settings.invariance_max_steps if max_steps is None else max_steps
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if max_steps < 1:
        raise DomainError(f"max_steps must be at least 1, got {max_steps}")
    rng = rng or Xoshiro256StarStar(0)
    factor = mean_contraction_factor(sys, window, seed=rng.seed)

    distances: list[float] = []
    ratios: list[float] = []
    exact: list[bool] = []
    current = mu0
    for step in range(1, max_steps + 1):
        following = hutchinson_step(sys, current, cap, rng)
        distance, is_exact = w1_distance(current, following, rng)
        if distances:
            ratios.append(distance / distances[-1] if distances[-1] > 0 else 0.0)
        distances.append(distance)
        exact.append(is_exact)
        logger.debug("Invariance step %d: W1=%.3e (%s)", step, distance, "exact" if is_exact else "sliced")
        current = following
        if distance < tol:
            return current, ConvergenceTrace(tuple(distances), tuple(ratios), factor, tuple(exact))

    trace = ConvergenceTrace(tuple(distances), tuple(ratios), factor, tuple(exact))
    logger.warning("No invariance within %d steps (last W1=%.3e)", max_steps, distances[-1])
    raise NoConvergence(max_steps, trace)


def write_measure_csv(mu: EmpiricalMeasure, path: Union[str, Path]) -> Path:
    return write_table(path, ["x", "y", "weight"], [mu.support[:, 0], mu.support[:, 1], mu.weights])


def write_trace_csv(trace: ConvergenceTrace, path: Union[str, Path]) -> Path:
    """
    ``step,distance,ratio``; the first row has no ratio and carries NaN.
    """
    steps = np.arange(1, len(trace.step_distances) + 1)
    ratios = np.concatenate([[np.nan], trace.ratios]) if trace.step_distances else np.empty(0)
    return write_table(path, ["step", "distance", "ratio"], [steps, trace.step_distances, ratios])
