"""
Running empirical frequencies of the contexts (x, s) and the plug-in TV estimate.
"""

import logging

import numpy as np

from Common.errors import DimensionError, UnsupportedCardinalityError
from Services.Probability.finite_distributions import (
    ContextSpace, JointDistribution, MixedAction, tv_distance
)

logger = logging.getLogger(__name__)


class EmpiricalJoint:
    """Counts n[x][s]; single owner, mutated in place by update"""

    def __init__(self, space: ContextSpace):
        self.space = space
        self.counts = np.zeros(space.shape, dtype=np.int64)
        self.total = 0
        self._estimate = None

    @classmethod
    def from_samples(cls, space: ContextSpace, contexts: np.ndarray, groups: np.ndarray) -> "EmpiricalJoint":
        emp = cls(space)
        flat = np.asarray(contexts) * space.n_sensitive + np.asarray(groups)
        emp.counts = np.bincount(flat, minlength=emp.counts.size).reshape(space.shape).astype(np.int64)
        emp.total = int(flat.shape[0])
        return emp

    def update(self, x: int, s: int) -> "EmpiricalJoint":
        if not (0 <= x < self.space.n_contexts and 0 <= s < self.space.n_sensitive):
            raise DimensionError(f"Context ({x}, {s}) out of range for shape {self.space.shape}")
        self.counts[x, s] += 1
        self.total += 1
        self._estimate = None
        return self

    @property
    def group_counts(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def estimate(self) -> JointDistribution:
        """counts / t, or the uniform table before the first observation"""
        if self._estimate is None:
            if self.total == 0:
                table = np.full(self.space.shape, 1.0 / self.counts.size)
            else:
                table = self.counts / self.total
            self._estimate = JointDistribution(table, self.space)
        return self._estimate

    def gamma_hat(self) -> np.ndarray:
        if self.total == 0:
            return np.full(self.space.n_sensitive, 1.0 / self.space.n_sensitive)
        return self.group_counts / self.total

    def conditional_hat(self, s: int) -> MixedAction:
        """Empirical Q^s; uniform over X while group s is unseen"""
        column = self.counts[:, s]
        if column.sum() == 0:
            return MixedAction.uniform(self.space.n_contexts)
        return MixedAction(column / column.sum())


def update(emp: EmpiricalJoint, x: int, s: int) -> EmpiricalJoint:
    return emp.update(x, s)


def tv_plugin(emp: EmpiricalJoint) -> float:
    """TV(Q^0_hat, Q^1_hat) with the uniform fallback for an unseen group"""
    if emp.space.n_sensitive != 2:
        raise UnsupportedCardinalityError("The plug-in TV estimate is defined for two groups")
    return tv_distance(emp.conditional_hat(0), emp.conditional_hat(1))
