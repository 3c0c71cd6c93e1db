"""
Frank-Wolfe minimization of dist(sum_x sum_s Q(x,s) m(p^x, q^{x,s}, x, s), C)
over per-context Player families.
"""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from Common.constants import FRANK_WOLFE_MAX_ITERATIONS, FRANK_WOLFE_TOLERANCE, TIE_TOLERANCE
from Common.errors import DimensionError
from Services.Geometry.target_sets import TargetSet
from Services.Objectives.payoff_tensor import PayoffTensor
from Services.Probability.finite_distributions import JointDistribution, MixedAction
from Services.Strategies.monitoring import NatureFamily

logger = logging.getLogger(__name__)


@dataclass
class FrankWolfeResult:
    family: np.ndarray
    distance: float
    converged: bool
    iterations: int
    history: List[float] = field(default_factory=list)

    def mixed_action(self, x: int) -> MixedAction:
        return MixedAction(self.family[x])


def expected_payoff_columns(payoff: PayoffTensor, Q: JointDistribution, nature_family: NatureFamily) -> np.ndarray:
    """g[x, a] = sum_s Q(x, s) sum_b q^{x,s}(b) m(a, b, x, s)"""
    if payoff.game_shape[2:] != Q.shape:
        raise DimensionError(f"Payoff contexts {payoff.game_shape[2:]} differ from Q shape {Q.shape}")
    if nature_family.table.shape != (Q.shape[0], Q.shape[1], payoff.n_outcomes):
        raise DimensionError(f"Nature family shape {nature_family.table.shape} does not fit the game")
    return np.einsum("xs,xsb,abxsd->xad", Q.table, nature_family.table, payoff.entries)


def _argmin_first(values: np.ndarray) -> int:
    return int(np.flatnonzero(values <= values.min() + TIE_TOLERANCE)[0])


def frank_wolfe_min_distance(payoff: PayoffTensor, Q: JointDistribution, nature_family: NatureFamily,
                             target: TargetSet, max_iter: int = FRANK_WOLFE_MAX_ITERATIONS,
                             tol: float = FRANK_WOLFE_TOLERANCE) -> FrankWolfeResult:
    """
    Frank-Wolfe on half the squared distance over the product of per-x simplices.

    The linear subproblem picks, for every x, the action with the smallest
    gradient <z - Proj(z), g[x, a]>. The step is the closed-form minimizer of
    the quadratic model with the projection frozen, compared against the full
    step on the true distance; the better of the two is kept so the objective
    never increases. Stops when the distance or the duality gap falls below tol.
    """
    columns = expected_payoff_columns(payoff, Q, nature_family)
    n_contexts, n_actions, _ = columns.shape
    family = np.full((n_contexts, n_actions), 1.0 / n_actions)
    z = np.einsum("xa,xad->d", family, columns)
    distance = target.distance(z)
    history = [distance]

    for iteration in range(1, max_iter + 1):
        if distance <= tol:
            return FrankWolfeResult(family, distance, True, iteration - 1, history)
        residual = z - target.project(z)
        gradient = columns @ residual
        vertex = [_argmin_first(gradient[x]) for x in range(n_contexts)]
        z_vertex = columns[np.arange(n_contexts), vertex].sum(axis=0)
        direction = z_vertex - z
        gap = -float(residual @ direction)
        if gap <= 0.5 * tol * tol:
            return FrankWolfeResult(family, distance, True, iteration - 1, history)

        step = min(1.0, max(0.0, gap / float(direction @ direction)))
        candidates = [(target.distance(z + step * direction), step)]
        if step < 1.0:
            candidates.append((target.distance(z_vertex), 1.0))
        best_distance, best_step = min(candidates)
        if best_distance > distance:
            logger.debug(f"Frank-Wolfe stalled at iteration {iteration}, distance {distance:.3e}")
            return FrankWolfeResult(family, distance, False, iteration, history)

        vertex_family = np.zeros_like(family)
        vertex_family[np.arange(n_contexts), vertex] = 1.0
        family = (1.0 - best_step) * family + best_step * vertex_family
        z = z + best_step * direction
        distance = best_distance
        history.append(distance)

    logger.debug(f"Frank-Wolfe stopped after {max_iter} iterations at distance {distance:.3e}")
    return FrankWolfeResult(family, distance, distance <= tol, max_iter, history)
