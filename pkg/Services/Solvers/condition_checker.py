"""
ConditionChecker - brute-force test of the dual approachability condition:
for every Nature family on a simplex grid, some Player family puts the
expected payoff in the target.
"""

import itertools
import logging
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Sequence, Tuple

import numpy as np

from Common.constants import (
    CHECK_FRANK_WOLFE_MAX_ITERATIONS, CHECK_FRANK_WOLFE_TOLERANCE, CHECK_GRID_GUARD, CHECK_TOLERANCE
)
from Common.errors import DimensionError, GridSizeError
from Services.BatchProcessor import BatchProcessor
from Services.Geometry.target_sets import TargetSet
from Services.Objectives.payoff_tensor import PayoffTensor
from Services.Probability.finite_distributions import JointDistribution
from Services.Solvers.frank_wolfe import frank_wolfe_min_distance
from Services.Strategies.monitoring import Monitoring, NatureFamily

logger = logging.getLogger(__name__)

CHUNK_SIZE = 256


@dataclass
class ConditionReport:
    satisfied: bool
    inner_distance: float
    worst_family: NatureFamily
    worst_player_family: np.ndarray
    worst_index: int
    n_families: int
    resolution: float
    tolerance: float

    def to_dict(self) -> Dict:
        return {
            "satisfied": self.satisfied,
            "inner_distance": self.inner_distance,
            "resolution": self.resolution,
            "tolerance": self.tolerance,
            "n_families": self.n_families,
            "worst_index": self.worst_index,
            "worst_nature_family": self.worst_family.to_config(),
            "worst_player_family": [[repr(float(w)) for w in row] for row in self.worst_player_family],
        }


@dataclass
class TwoResolutionReport:
    reports: List[ConditionReport] = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return len({report.satisfied for report in self.reports}) == 1

    @property
    def satisfied(self) -> bool:
        return self.agree and self.reports[0].satisfied

    def to_dict(self) -> Dict:
        return {"agree": self.agree, "satisfied": self.satisfied,
                "reports": [report.to_dict() for report in self.reports]}


def grid_steps(resolution: float) -> int:
    steps = int(round(1.0 / float(resolution)))
    if steps < 1 or abs(steps * float(resolution) - 1.0) > 1e-9:
        raise DimensionError(f"Grid resolution must be 1/n for an integer n, got {resolution}")
    return steps


def simplex_grid(n_outcomes: int, steps: int) -> np.ndarray:
    """All points of the simplex with coordinates in {0, 1/steps, ..., 1}, lexicographic order"""
    points = []
    for combo in itertools.product(range(steps + 1), repeat=n_outcomes - 1):
        if sum(combo) <= steps:
            points.append(combo + (steps - sum(combo),))
    return np.array(points, dtype=float) / steps


def observed_cells(Q: JointDistribution, monitoring: Monitoring) -> List[Tuple[int, ...]]:
    """Observations with positive mass; Nature's choice elsewhere does not affect the payoff"""
    if Monitoring(monitoring) is Monitoring.AWARE:
        return [(x, s) for x in range(Q.shape[0]) for s in range(Q.shape[1]) if Q.table[x, s] > 0]
    marginal = Q.table.sum(axis=1)
    return [(x,) for x in range(Q.shape[0]) if marginal[x] > 0]


def grid_size(n_outcomes: int, steps: int, n_cells: int) -> int:
    return comb(steps + n_outcomes - 1, n_outcomes - 1) ** n_cells


def _family(points: np.ndarray, combo: Sequence[int], cells: Sequence[Tuple[int, ...]],
            shape: Tuple[int, int], monitoring: Monitoring) -> NatureFamily:
    n_outcomes = points.shape[1]
    table = np.full(shape + (n_outcomes,), 1.0 / n_outcomes)
    for cell, point_index in zip(cells, combo):
        if len(cell) == 1:
            table[cell[0], :, :] = points[point_index]
        else:
            table[cell[0], cell[1], :] = points[point_index]
    return NatureFamily(table, monitoring)


def check_condition_bruteforce(payoff: PayoffTensor, Q: JointDistribution, target: TargetSet,
                               monitoring: Monitoring, grid_resolution: float,
                               tolerance: float = CHECK_TOLERANCE, workers: int = 1,
                               max_iter: int = CHECK_FRANK_WOLFE_MAX_ITERATIONS,
                               fw_tol: float = CHECK_FRANK_WOLFE_TOLERANCE,
                               guard: int = CHECK_GRID_GUARD) -> ConditionReport:
    """
    Maximize the Frank-Wolfe inner distance over a grid of Nature families.

    Raises:
        GridSizeError: If the grid has more points than the guard allows
    """
    monitoring = Monitoring(monitoring)
    steps = grid_steps(grid_resolution)
    cells = observed_cells(Q, monitoring)
    n_families = grid_size(payoff.n_outcomes, steps, len(cells))
    if n_families > guard:
        raise GridSizeError(n_families, guard)
    points = simplex_grid(payoff.n_outcomes, steps)
    logger.info(f"Checking {n_families} Nature families at resolution 1/{steps}")

    def evaluate_chunk(start: int, combos: List[Tuple[int, ...]]):
        best = None
        for offset, combo in enumerate(combos):
            family = _family(points, combo, cells, Q.shape, monitoring)
            result = frank_wolfe_min_distance(payoff, Q, family, target, max_iter, fw_tol)
            if best is None or result.distance > best[0]:
                best = (result.distance, start + offset, family, result.family)
        return best

    jobs = []
    combos = itertools.product(range(len(points)), repeat=len(cells))
    start = 0
    while True:
        chunk = list(itertools.islice(combos, CHUNK_SIZE))
        if not chunk:
            break
        jobs.append((start, lambda start=start, chunk=chunk: evaluate_chunk(start, chunk)))
        start += len(chunk)

    processor = BatchProcessor(max_workers=workers, show_progress=n_families > CHUNK_SIZE,
                               description=f"check 1/{steps}")
    chunk_results = [result.payload for result in processor.process(jobs)]
    worst = chunk_results[0]
    for candidate in chunk_results[1:]:
        if candidate[0] > worst[0]:
            worst = candidate
    distance, index, family, player_family = worst
    satisfied = distance <= tolerance
    logger.info(f"Resolution 1/{steps}: inner distance {distance:.6f} -> {'satisfied' if satisfied else 'violated'}")
    return ConditionReport(satisfied=satisfied, inner_distance=float(distance), worst_family=family,
                           worst_player_family=player_family, worst_index=index, n_families=n_families,
                           resolution=1.0 / steps, tolerance=tolerance)


def check_condition_two_resolutions(payoff: PayoffTensor, Q: JointDistribution, target: TargetSet,
                                    monitoring: Monitoring, resolutions: Sequence[float],
                                    **kwargs) -> TwoResolutionReport:
    """Run the brute force at each resolution; the verdict counts only when they agree"""
    report = TwoResolutionReport()
    for resolution in resolutions:
        report.reports.append(check_condition_bruteforce(payoff, Q, target, monitoring, resolution, **kwargs))
    if not report.agree:
        logger.warning("Condition verdicts differ across grid resolutions")
    return report
