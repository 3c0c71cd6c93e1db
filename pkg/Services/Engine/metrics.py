"""
Criteria evaluated on trajectories: calibration, group calibration, demographic
parity, equalized payoffs, regret, group regret and the distance to the target.
Group-normalized criteria use the true gammas of the simulated Q.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from Common.errors import DimensionError, UndefinedMetricError
from Services.Engine.trajectory import Trajectory
from Services.Geometry.target_sets import TargetSet
from Services.Objectives.objective_catalog import CalibrationGrid

logger = logging.getLogger(__name__)


def _prefix(traj: Trajectory, upto: Optional[int]) -> int:
    t = traj.length if upto is None else upto
    if not 1 <= t <= traj.length:
        raise DimensionError(f"Round {t} outside the recorded range 1..{traj.length}")
    return t


def _levels(traj: Trajectory, N: Optional[int], t: int) -> np.ndarray:
    N = N if N is not None else traj.calibration_N
    if N is None:
        raise DimensionError("Trajectory was not played on a calibration grid")
    if traj.actions[:t].max() >= N or traj.outcomes[:t].max() > 1:
        raise DimensionError("Actions are not calibration levels or outcomes are not binary")
    return CalibrationGrid(N).levels


def _require_groups(traj: Trajectory, t: int, metric: str) -> np.ndarray:
    counts = traj.group_counts(t)
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        raise UndefinedMetricError(metric, f"group(s) {missing.tolist()} not observed in the first {t} rounds")
    return counts


def _two_groups(gammas: Sequence[float], metric: str) -> np.ndarray:
    gammas = np.asarray(gammas, dtype=float)
    if gammas.shape != (2,):
        raise DimensionError(f"{metric} is defined for two groups")
    return gammas


def _bin_gaps(traj: Trajectory, levels: np.ndarray, t: int, mask: Optional[np.ndarray] = None) -> np.ndarray:
    actions = traj.actions[:t]
    gaps = levels[actions] - traj.outcomes[:t]
    if mask is not None:
        gaps = np.where(mask, gaps, 0.0)
    return np.bincount(actions, weights=gaps, minlength=len(levels))


def metric_calibration(traj: Trajectory, N: int, upto: Optional[int] = None) -> float:
    """C_t = sum_k |(1/t) sum (a_k - b) 1{k_t = k}|"""
    t = _prefix(traj, upto)
    levels = _levels(traj, N, t)
    return float(np.abs(_bin_gaps(traj, levels, t) / t).sum())


def metric_group_calibration(traj: Trajectory, N: int, gammas: Sequence[float],
                             upto: Optional[int] = None) -> float:
    """C_gr,t: per-group bins normalized by 1/(gamma_s t)"""
    t = _prefix(traj, upto)
    levels = _levels(traj, N, t)
    gammas = np.asarray(gammas, dtype=float)
    groups = traj.groups[:t]
    total = 0.0
    for s, gamma in enumerate(gammas):
        if gamma <= 0:
            continue
        total += float(np.abs(_bin_gaps(traj, levels, t, groups == s) / (gamma * t)).sum())
    return total


def _group_difference(values: np.ndarray, traj: Trajectory, gammas: np.ndarray, t: int) -> float:
    groups = traj.groups[:t]
    means = [values[groups == s].sum() / (gammas[s] * t) for s in range(2)]
    return float(abs(means[0] - means[1]))


def metric_dp(traj: Trajectory, gammas: Sequence[float], upto: Optional[int] = None,
              N: Optional[int] = None) -> float:
    """D_t = |(1/(g0 t)) sum a_t 1{s=0} - (1/(g1 t)) sum a_t 1{s=1}|"""
    t = _prefix(traj, upto)
    gammas = _two_groups(gammas, "demographic parity")
    _require_groups(traj, t, "D")
    levels = _levels(traj, N, t)
    return _group_difference(levels[traj.actions[:t]], traj, gammas, t)


def _realized_rewards(traj: Trajectory, r: np.ndarray, t: int) -> Tuple[np.ndarray, np.ndarray]:
    """(reward of the played action, reward of every comparator action) per round"""
    r = np.asarray(r, dtype=float)
    if r.ndim != 4 or r.shape[0] <= traj.actions[:t].max() or r.shape[1] <= traj.outcomes[:t].max():
        raise DimensionError(f"Reward tensor of shape {r.shape} does not match the trajectory")
    b, x, s = traj.outcomes[:t], traj.contexts[:t], traj.groups[:t]
    comparators = r[:, b, x, s]
    played = comparators[traj.actions[:t], np.arange(t)]
    return played, comparators


def metric_regret(traj: Trajectory, r: np.ndarray, upto: Optional[int] = None) -> float:
    """R_t = min_a' (1/t) sum (r(a_t, ...) - r(a', ...))"""
    t = _prefix(traj, upto)
    played, comparators = _realized_rewards(traj, r, t)
    return float(((played[None, :] - comparators).sum(axis=1) / t).min())


def metric_group_regret(traj: Trajectory, r: np.ndarray, upto: Optional[int] = None,
                        gammas: Optional[Sequence[float]] = None, normalized: bool = False) -> float:
    """R_gr,t = min over (s, a') of the group-restricted average regret"""
    t = _prefix(traj, upto)
    played, comparators = _realized_rewards(traj, r, t)
    groups = traj.groups[:t]
    differences = played[None, :] - comparators
    worst = np.inf
    for s in range(np.asarray(r).shape[3]):
        scale = t
        if normalized:
            if gammas is None:
                raise DimensionError("The normalized group regret needs gammas")
            scale = gammas[s] * t
        worst = min(worst, float((differences[:, groups == s].sum(axis=1) / scale).min()))
    return worst


def metric_equalized_payoffs(traj: Trajectory, r: np.ndarray, gammas: Sequence[float],
                             upto: Optional[int] = None) -> float:
    """P_t = |(1/(g0 t)) sum r_t 1{s=0} - (1/(g1 t)) sum r_t 1{s=1}|"""
    t = _prefix(traj, upto)
    gammas = _two_groups(gammas, "equalized payoffs")
    _require_groups(traj, t, "P")
    played, _ = _realized_rewards(traj, r, t)
    return _group_difference(played, traj, gammas, t)


def metric_distance_series(traj: Trajectory, target: TargetSet) -> List[Tuple[int, float]]:
    if target.dim != traj.dim:
        raise DimensionError(f"Target dimension {target.dim} differs from payoff dimension {traj.dim}")
    return [(t, target.distance(traj.average(t))) for t in traj.grid if t <= traj.length]


def metric_rate_bound(K: float, T: int) -> float:
    return float(np.sqrt(K / T))


@dataclass
class MetricSuite:
    """Which criteria to evaluate; absent inputs leave their columns blank"""
    target: TargetSet
    N: Optional[int] = None
    gammas: Optional[np.ndarray] = None
    reward: Optional[np.ndarray] = None

    def columns(self) -> Dict[str, bool]:
        two_groups = self.gammas is not None and len(self.gammas) == 2
        return {
            "d_t": True,
            "C_t": self.N is not None,
            "Cgr_t": self.N is not None and self.gammas is not None,
            "D_t": self.N is not None and two_groups,
            "P_t": self.reward is not None and two_groups,
            "R_t": self.reward is not None,
            "Rgr_t": self.reward is not None,
        }


def compute_metric_series(traj: Trajectory, suite: MetricSuite) -> Dict[str, List[Optional[float]]]:
    """Evaluate every enabled criterion on the trajectory grid; undefined points stay None"""
    evaluators = {
        "d_t": lambda t: suite.target.distance(traj.average(t)),
        "C_t": lambda t: metric_calibration(traj, suite.N, t),
        "Cgr_t": lambda t: metric_group_calibration(traj, suite.N, suite.gammas, t),
        "D_t": lambda t: metric_dp(traj, suite.gammas, t, suite.N),
        "P_t": lambda t: metric_equalized_payoffs(traj, suite.reward, suite.gammas, t),
        "R_t": lambda t: metric_regret(traj, suite.reward, t),
        "Rgr_t": lambda t: metric_group_regret(traj, suite.reward, t),
    }
    grid = [t for t in traj.grid if t <= traj.length]
    series: Dict[str, List[Optional[float]]] = {"t": [float(t) for t in grid]}
    for column, enabled in suite.columns().items():
        if not enabled:
            continue
        values: List[Optional[float]] = []
        for t in grid:
            try:
                values.append(evaluators[column](t))
            except UndefinedMetricError as e:
                traj.metric_flags.setdefault(column, {})[t] = e.reason
                values.append(None)
        series[column] = values
    traj.metric_series = series
    return series
