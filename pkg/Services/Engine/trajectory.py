"""
Trajectory - per-round record of a simulated game plus running averages and
metric series sampled on a geometric grid of rounds.
"""

from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional

import numpy as np

from Common.errors import DimensionError
from Services.Geometry.target_sets import TargetSet
from utils.compensated_sum import CompensatedSum


@dataclass(frozen=True)
class RoundRecord:
    t: int
    x: int
    s: int
    a: int
    b: int
    payoff: np.ndarray


def geometric_grid(horizon: int) -> List[int]:
    """Powers of two up to the horizon, plus the horizon itself"""
    if horizon < 1:
        raise DimensionError("Horizon must be >= 1")
    grid = [2 ** r for r in range(horizon.bit_length()) if 2 ** r <= horizon]
    if grid[-1] != horizon:
        grid.append(horizon)
    return grid


class Trajectory:
    """Write-once record; frozen by the engine at the end of a run"""

    def __init__(self, horizon: int, dim: int, n_groups: int, grid: Optional[List[int]] = None,
                 calibration_N: Optional[int] = None):
        self.horizon = horizon
        self.dim = dim
        self.n_groups = n_groups
        self.grid = sorted(set(grid)) if grid else geometric_grid(horizon)
        self.calibration_N = calibration_N
        self.contexts = np.zeros(horizon, dtype=np.int64)
        self.groups = np.zeros(horizon, dtype=np.int64)
        self.actions = np.zeros(horizon, dtype=np.int64)
        self.outcomes = np.zeros(horizon, dtype=np.int64)
        self.payoffs = np.zeros((horizon, dim))
        self.length = 0
        self.snapshots: Dict[int, np.ndarray] = {}
        self.metric_series: Dict[str, List[Optional[float]]] = {}
        self.metric_flags: Dict[str, Dict[int, str]] = {}
        self.seed: Optional[int] = None
        self._sum = CompensatedSum(dim)
        self._grid_set = set(self.grid)

    def append(self, x: int, s: int, a: int, b: int, payoff: np.ndarray) -> None:
        if self.length >= self.horizon:
            raise DimensionError("Trajectory is full")
        i = self.length
        self.contexts[i], self.groups[i], self.actions[i], self.outcomes[i] = x, s, a, b
        self.payoffs[i] = payoff
        self._sum.add(payoff)
        self.length += 1
        if self.length in self._grid_set:
            self.snapshots[self.length] = self._sum.mean()

    def freeze(self) -> None:
        for array in (self.contexts, self.groups, self.actions, self.outcomes, self.payoffs):
            array.flags.writeable = False

    @property
    def m_bar(self) -> np.ndarray:
        return self._sum.mean()

    def average(self, t: Optional[int] = None) -> np.ndarray:
        """m_bar_t; compensated at grid rounds, recomputed from the rounds otherwise"""
        t = self.length if t is None else t
        if t == self.length:
            return self.m_bar
        if t in self.snapshots:
            return self.snapshots[t]
        return self.recompute_average(t)

    def recompute_average(self, t: Optional[int] = None) -> np.ndarray:
        t = self.length if t is None else t
        if not 1 <= t <= self.length:
            raise DimensionError(f"Round {t} outside the recorded range 1..{self.length}")
        return self.payoffs[:t].sum(axis=0) / t

    def group_counts(self, t: Optional[int] = None) -> np.ndarray:
        t = self.length if t is None else t
        return np.bincount(self.groups[:t], minlength=self.n_groups)

    def record(self, t: int) -> RoundRecord:
        i = t - 1
        return RoundRecord(t, int(self.contexts[i]), int(self.groups[i]), int(self.actions[i]),
                           int(self.outcomes[i]), self.payoffs[i])

    def rounds(self) -> Iterator[RoundRecord]:
        for t in range(1, self.length + 1):
            yield self.record(t)

    def empirical_B(self, target: TargetSet) -> float:
        """Largest distance of an observed instantaneous payoff to the target"""
        observed = np.unique(self.payoffs[:self.length], axis=0)
        return float(max(target.distance(v) for v in observed)) if len(observed) else 0.0
