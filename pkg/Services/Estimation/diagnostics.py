"""
Estimation diagnostics - Monte-Carlo checks of the context estimator rate and
of the hat-set coverage event, replicated over independent seeded streams.
"""

import logging
from dataclasses import dataclass, asdict
from typing import List, Optional, Sequence

import numpy as np

from Common.constants import ASSUMPTION1_GRID, COVERAGE_DEFAULT_REPS, MAX_WORKERS
from Common.errors import DimensionError
from Services.BatchProcessor import BatchProcessor
from Services.Estimation.empirical_joint import EmpiricalJoint
from Services.Estimation.hat_sets import HatSets, hat_target
from Services.Geometry.target_sets import hausdorff_onesided, is_subset
from Services.Objectives.objective_catalog import tilde_target
from Services.Pareto.frontier import tradeoff_budgets
from Services.Probability.finite_distributions import JointDistribution, tv_distance
from Services.Strategies.monitoring import Monitoring

logger = logging.getLogger(__name__)


@dataclass
class DiagnosticRow:
    t: int
    mean_tv2: float
    t_times_mean_tv2: float
    stderr: float


@dataclass
class CoverageReport:
    T_r: int
    n_reps: int
    covered: int
    frequency: float
    bound: float
    mean_hausdorff: Optional[float] = None

    def to_dict(self):
        return asdict(self)


def draw_contexts(Q: JointDistribution, n: int, rng: np.random.Generator):
    """n i.i.d. (x, s) draws by inverse CDF, one uniform per draw"""
    flat = np.searchsorted(Q.flat_cumulative, rng.random(n), side="right")
    flat = np.minimum(flat, Q.flat_support_end)
    return np.divmod(flat, Q.space.n_sensitive)


def _replication_seeds(seed: int, n_reps: int) -> List[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(n_reps)


def _tv_path(Q: JointDistribution, grid: Sequence[int], child: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(child))
    xs, ss = draw_contexts(Q, max(grid), rng)
    return np.array([tv_distance(EmpiricalJoint.from_samples(Q.space, xs[:t], ss[:t]).estimate(), Q)
                     for t in grid])


def assumption1_diagnostic(Q: JointDistribution, n_reps: int, seed: int = 0,
                           grid: Sequence[int] = ASSUMPTION1_GRID,
                           workers: int = MAX_WORKERS) -> List[DiagnosticRow]:
    """
    Estimate E[TV^2(Q_hat_t, Q)] at each t of the grid.

    Replication k uses the k-th child of SeedSequence(seed), so the table does
    not depend on the worker count.
    """
    if n_reps < 1:
        raise DimensionError("At least one replication is needed")
    grid = sorted(int(t) for t in grid)
    if grid[0] < 1:
        raise DimensionError("Diagnostic rounds must be >= 1")
    processor = BatchProcessor(max_workers=workers, show_progress=False, description="Assumption 1")
    jobs = [(k, (lambda child=child: _tv_path(Q, grid, child))) for k, child in
            enumerate(_replication_seeds(seed, n_reps))]
    squared = np.array([result.payload for result in processor.process(jobs)]) ** 2

    rows = []
    for j, t in enumerate(grid):
        column = squared[:, j]
        mean = float(column.mean())
        stderr = float(column.std(ddof=1) / np.sqrt(n_reps)) if n_reps > 1 else 0.0
        rows.append(DiagnosticRow(t, mean, t * mean, stderr))
    return rows


def boundedness_ratio(rows: Sequence[DiagnosticRow]) -> float:
    """max / min of t * E[TV^2] over the grid; inf when some entry is zero and another is not"""
    values = np.array([row.t_times_mean_tv2 for row in rows])
    if np.all(values == 0):
        return 1.0
    if values.min() == 0:
        return float("inf")
    return float(values.max() / values.min())


def _coverage_replication(Q: JointDistribution, true_set, tau: float, N: int, T_r: int,
                          monitoring: Monitoring, calibration_slack: float,
                          child: np.random.SeedSequence, hausdorff_samples: int):
    rng = np.random.Generator(np.random.PCG64(child))
    xs, ss = draw_contexts(Q, T_r, rng)
    emp = EmpiricalJoint.from_samples(Q.space, xs, ss)
    estimated = hat_target(HatSets.from_empirical(emp, tau, monitoring, calibration_slack), N)
    covered = is_subset(true_set, estimated)
    distance = hausdorff_onesided(estimated, true_set, hausdorff_samples, rng) if hausdorff_samples else None
    return covered, distance


def hat_set_coverage(Q: JointDistribution, tau: float, N: int, T_r: int,
                     n_reps: int = COVERAGE_DEFAULT_REPS, seed: int = 0,
                     monitoring: Monitoring = Monitoring.UNAWARE, calibration_slack: float = 0.0,
                     hausdorff_samples: int = 0, workers: int = MAX_WORKERS) -> CoverageReport:
    """
    Frequency of the event {true tilde target inside the hat set built after T_r rounds},
    replicating the estimation step alone.
    """
    epsilon, delta = tradeoff_budgets(tv_distance(Q.conditional(0), Q.conditional(1)), tau,
                                      monitoring, calibration_slack)
    true_set = tilde_target(N, Q.gammas, epsilon, delta)
    processor = BatchProcessor(max_workers=workers, show_progress=False, description="Coverage")
    jobs = [(k, (lambda child=child: _coverage_replication(Q, true_set, tau, N, T_r, monitoring,
                                                           calibration_slack, child, hausdorff_samples)))
            for k, child in enumerate(_replication_seeds(seed, n_reps))]
    outcomes = [result.payload for result in processor.process(jobs)]

    covered = sum(1 for hit, _ in outcomes if hit)
    distances = [d for _, d in outcomes if d is not None]
    report = CoverageReport(T_r, n_reps, covered, covered / n_reps, 1.0 - 1.0 / (2 * T_r),
                            float(np.mean(distances)) if distances else None)
    logger.info(f"Hat-set coverage at T_r={T_r}: {report.frequency:.3f} (bound {report.bound:.4f})")
    return report
