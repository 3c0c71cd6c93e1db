"""
Confidence widths, plug-in hat sets for the tradeoff target, and the doubling
phase schedule on which they are refreshed.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from Common.errors import DimensionError
from Services.Estimation.empirical_joint import EmpiricalJoint, tv_plugin
from Services.Geometry.target_sets import (
    Box, Intersection, Product, TargetSet, WeightedL1Ball, WeightedSlab
)
from Services.Pareto.frontier import tradeoff_budgets
from Services.Probability.finite_distributions import JointDistribution, tv_distance
from Services.Strategies.monitoring import Monitoring

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConfidenceWidths:
    alpha1: float
    alpha2: float
    t: int

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DimensionError(f"{name} must lie in [0, 1], got {value}")

    @property
    def inflation(self) -> float:
        return self.alpha1 + 4.0 * self.alpha2

    @classmethod
    def zero(cls, t: int = 0) -> "ConfidenceWidths":
        return cls(0.0, 0.0, t)


def _theta(n: int, t: int, x_card: int) -> float:
    if n == 0:
        return 1.0
    return math.sqrt((x_card + math.log(8 * t)) / (2 * n))


def widths(t: int, n0: int, n1: int, x_card: int) -> ConfidenceWidths:
    """alpha2 = 1 ^ sqrt(ln(8t)/(2t)); alpha1 = 1 ^ (theta(n0) + theta(n1))"""
    if t < 1:
        raise DimensionError(f"Widths need t >= 1, got {t}")
    if n0 + n1 != t:
        raise DimensionError(f"Group counts {n0} + {n1} do not add up to t = {t}")
    alpha2 = min(1.0, math.sqrt(math.log(8 * t) / (2 * t)))
    alpha1 = min(1.0, _theta(n0, t, x_card) + _theta(n1, t, x_card))
    return ConfidenceWidths(alpha1, alpha2, t)


@dataclass(frozen=True)
class HatSets:
    gamma_hat: Tuple[float, float]
    M_hat: float
    tau: float
    widths: ConfidenceWidths
    monitoring: Monitoring = Monitoring.UNAWARE
    calibration_slack: float = 0.0

    @property
    def budgets(self) -> Tuple[float, float]:
        return tradeoff_budgets(self.M_hat, self.tau, self.monitoring, self.calibration_slack)

    @property
    def epsilon_hat(self) -> float:
        return self.budgets[0]

    @property
    def delta_hat(self) -> float:
        return self.budgets[1]

    @classmethod
    def from_empirical(cls, emp: EmpiricalJoint, tau: float, monitoring: Monitoring = Monitoring.UNAWARE,
                       calibration_slack: float = 0.0) -> "HatSets":
        n0, n1 = (int(n) for n in emp.group_counts)
        gamma_hat = tuple(float(g) for g in emp.gamma_hat())
        return cls(gamma_hat, tv_plugin(emp), tau, widths(emp.total, n0, n1, emp.space.n_contexts),
                   monitoring, calibration_slack)

    @classmethod
    def exact(cls, Q: JointDistribution, tau: float, monitoring: Monitoring = Monitoring.UNAWARE,
              calibration_slack: float = 0.0) -> "HatSets":
        """Known-Q hat sets: true gamma and TV, zero widths"""
        tv_value = tv_distance(Q.conditional(0), Q.conditional(1))
        return cls(tuple(float(g) for g in Q.gammas), tv_value, tau, ConfidenceWidths.zero(),
                   monitoring, calibration_slack)


def build_hat_sets(hat: HatSets, N: int) -> Tuple[TargetSet, TargetSet]:
    """
    C_gcal = unit l1 ball and {g1 ||v0||_1 + g0 ||v1||_1 <= g0 g1 eps + a1 + 4 a2};
    C_dp = unit box and {|g1 u - g0 v| <= g0 g1 delta + a1 + 4 a2}.
    """
    gamma0, gamma1 = hat.gamma_hat
    inflation = hat.widths.inflation
    unit_ball = WeightedL1Ball.unit(2 * N)
    if gamma0 > 0 and gamma1 > 0:
        weights = np.concatenate([np.full(N, gamma1), np.full(N, gamma0)])
        radius = gamma0 * gamma1 * hat.epsilon_hat + inflation
        calibration_set = Intersection([unit_ball, WeightedL1Ball(weights, radius)])
    else:
        calibration_set = Intersection([unit_ball])
    slab = WeightedSlab(np.array([gamma1, -gamma0]), gamma0 * gamma1 * hat.delta_hat + inflation)
    parity_set = Intersection([Box.unit(2), slab])
    return calibration_set, parity_set


def hat_target(hat: HatSets, N: int) -> Product:
    return Product(list(build_hat_sets(hat, N)))


@dataclass(frozen=True)
class PhaseSchedule:
    """Refresh times T_r = 2^r, r >= 0"""

    @staticmethod
    def refresh_time(r: int) -> int:
        return 2 ** r

    @staticmethod
    def phase(t: int) -> int:
        if t < 1:
            raise DimensionError("Rounds start at t = 1")
        return t.bit_length() - 1

    @staticmethod
    def is_refresh_time(t: int) -> bool:
        return t >= 1 and t & (t - 1) == 0

    @staticmethod
    def refresh_count(T: int) -> int:
        return PhaseSchedule.phase(T) + 1 if T >= 1 else 0
