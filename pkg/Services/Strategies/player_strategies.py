"""
Player strategies - Blackwell steering with known or estimated Q, the doubling
unknown-target variant, constant forecasts and the tradeoff oracle players.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from Common.constants import ZERO_STEERING_THRESHOLD
from Common.errors import DimensionError
from Services.Estimation.empirical_joint import EmpiricalJoint
from Services.Estimation.hat_sets import HatSets, PhaseSchedule, hat_target
from Services.Geometry.target_sets import TargetSet
from Services.Objectives.objective_catalog import CalibrationGrid, ObjectivePair
from Services.Probability.finite_distributions import (
    ContextPartition, ContextSpace, JointDistribution, MixedAction, partition_contexts
)
from Services.Solvers.game_solver import MatrixGame, solve_matrix_game, solve_weighted_minmax
from Services.Strategies.monitoring import Monitoring, NatureFamily
from utils.compensated_sum import CompensatedSum

logger = logging.getLogger(__name__)


def blackwell_step(pair: ObjectivePair, Q_hat: JointDistribution, m_bar: np.ndarray, c_bar: np.ndarray,
                   monitoring: Monitoring, x_observed: int) -> MixedAction:
    """
    Player's mixed action at the realized context from an argmin family of the
    scalarized game <m_bar - c_bar, m(p, q, x, s)>.

    The objective separates over x with weights Q_hat(x, .), so only x_observed is
    solved: a matrix game on sum_s Q_hat(x, s) <d, m(a, b, x, s)> under unaware
    monitoring, a weighted min-max over the s-blocks under aware monitoring.
    """
    payoff = pair.payoff
    n_actions = payoff.n_actions
    if m_bar.shape != (payoff.dim,) or c_bar.shape != (payoff.dim,):
        raise DimensionError(f"Steering vectors must live in R^{payoff.dim}")
    if n_actions == 1:
        return MixedAction.dirac(1, 0)
    direction = m_bar - c_bar
    if np.linalg.norm(direction) < ZERO_STEERING_THRESHOLD:
        logger.debug("Zero steering vector, playing uniform")
        return MixedAction.uniform(n_actions)
    weights = Q_hat.table[x_observed]
    if weights.sum() <= 0.0:
        logger.debug(f"Context {x_observed} outside the estimated support, playing uniform")
        return MixedAction.uniform(n_actions)

    scalarized = payoff.scalarized(direction, x_observed)
    if Monitoring(monitoring) is Monitoring.UNAWARE:
        game = MatrixGame(np.tensordot(scalarized, weights, axes=([2], [0])))
        return solve_matrix_game(game).row_strategy
    blocks = [(weights[s], scalarized[:, :, s]) for s in range(weights.shape[0])]
    p, _ = solve_weighted_minmax(blocks)
    return p


class PlayerStrategy(ABC):
    """Per-trajectory Player state; one instance per engine run"""
    name = "player"

    @abstractmethod
    def mixed_action(self, x: int) -> MixedAction:
        pass

    def observe_round(self, x: int, s: int, a: int, payoff: np.ndarray) -> None:
        """Post-round feedback: the Player learns s_t and the payoff vector"""


class _SteeringPlayer(PlayerStrategy):

    def __init__(self, pair: ObjectivePair, monitoring: Monitoring):
        self.pair = pair
        self.monitoring = Monitoring(monitoring)
        self._payoffs = CompensatedSum(pair.dim)

    @property
    def t(self) -> int:
        return self._payoffs.count

    @property
    def m_bar(self) -> np.ndarray:
        return self._payoffs.mean()

    def observe_round(self, x: int, s: int, a: int, payoff: np.ndarray) -> None:
        self._payoffs.add(payoff)

    @abstractmethod
    def q_estimate(self) -> JointDistribution:
        pass

    def steering_target(self, m_bar: np.ndarray) -> np.ndarray:
        return self.pair.target.project(m_bar)

    def mixed_action(self, x: int) -> MixedAction:
        if self.t == 0:
            return MixedAction.uniform(self.pair.payoff.n_actions)
        m_bar = self.m_bar
        return blackwell_step(self.pair, self.q_estimate(), m_bar, self.steering_target(m_bar), self.monitoring, x)


class BlackwellKnownQ(_SteeringPlayer):
    name = "blackwell_known_q"

    def __init__(self, pair: ObjectivePair, Q: JointDistribution, monitoring: Monitoring):
        super().__init__(pair, monitoring)
        self.Q = Q

    def q_estimate(self) -> JointDistribution:
        return self.Q


class BlackwellEstimatedQ(_SteeringPlayer):
    """Steers with the empirical frequencies Q_hat_t of the contexts seen so far"""
    name = "blackwell_estimated_q"

    def __init__(self, pair: ObjectivePair, space: ContextSpace, monitoring: Monitoring):
        super().__init__(pair, monitoring)
        self.empirical = EmpiricalJoint(space)

    def observe_round(self, x: int, s: int, a: int, payoff: np.ndarray) -> None:
        super().observe_round(x, s, a, payoff)
        self.empirical.update(x, s)

    def q_estimate(self) -> JointDistribution:
        return self.empirical.estimate()


@dataclass
class DoublingState:
    phase: int = -1
    hat_target: Optional[TargetSet] = None
    refresh_count: int = 0
    refresh_rounds: List[int] = field(default_factory=list)


def doubling_step(state: DoublingState, pair: ObjectivePair, Q_hat: JointDistribution, m_bar: np.ndarray,
                  monitoring: Monitoring, x_observed: int) -> MixedAction:
    """blackwell_step steered towards the current hat set instead of the true target"""
    if state.hat_target is None:
        return MixedAction.uniform(pair.payoff.n_actions)
    return blackwell_step(pair, Q_hat, m_bar, state.hat_target.project(m_bar), monitoring, x_observed)


HatSetBuilder = Callable[[EmpiricalJoint], TargetSet]


class DoublingUnknownTarget(_SteeringPlayer):
    """
    Unknown-target strategy: the hat set is rebuilt from the data at the end of
    rounds T_r = 2^r and frozen in between. The pair's own target is never used.
    """
    name = "doubling_unknown_target"

    def __init__(self, pair: ObjectivePair, N: int, tau: float, space: ContextSpace, monitoring: Monitoring,
                 calibration_slack: float = 0.0, hat_set_builder: Optional[HatSetBuilder] = None,
                 fixed_q: Optional[JointDistribution] = None):
        super().__init__(pair, monitoring)
        self.N = N
        self.tau = tau
        self.calibration_slack = calibration_slack
        self.empirical = EmpiricalJoint(space)
        self.state = DoublingState()
        self.hat_set_builder = hat_set_builder or self._plug_in_hat_set
        self.fixed_q = fixed_q

    def _plug_in_hat_set(self, empirical: EmpiricalJoint) -> TargetSet:
        hat = HatSets.from_empirical(empirical, self.tau, self.monitoring, self.calibration_slack)
        return hat_target(hat, self.N)

    def observe_round(self, x: int, s: int, a: int, payoff: np.ndarray) -> None:
        super().observe_round(x, s, a, payoff)
        self.empirical.update(x, s)
        t = self.empirical.total
        if PhaseSchedule.is_refresh_time(t):
            self.state.hat_target = self.hat_set_builder(self.empirical)
            self.state.phase = PhaseSchedule.phase(t)
            self.state.refresh_count += 1
            self.state.refresh_rounds.append(t)
            logger.debug(f"Hat set refreshed after round {t} (phase {self.state.phase})")

    def q_estimate(self) -> JointDistribution:
        return self.fixed_q if self.fixed_q is not None else self.empirical.estimate()

    def mixed_action(self, x: int) -> MixedAction:
        if self.t == 0:
            return MixedAction.uniform(self.pair.payoff.n_actions)
        return doubling_step(self.state, self.pair, self.q_estimate(), self.m_bar, self.monitoring, x)


class ConstantForecast(PlayerStrategy):
    name = "constant_forecast"

    def __init__(self, k: int, n_actions: int):
        self.action = MixedAction.dirac(n_actions, k)

    def mixed_action(self, x: int) -> MixedAction:
        return self.action


def _check_tau(tau: float) -> None:
    if not 0.0 <= tau <= 1.0:
        raise DimensionError(f"tau must lie in [0, 1], got {tau}")


def _mixture(tau: float, base_index: int, tilted_index: int, N: int) -> MixedAction:
    weights = np.zeros(N)
    weights[base_index] += 1.0 - tau
    weights[tilted_index] += tau
    return MixedAction(weights)


def pareto_oracle_aware(tau: float, q_family: NatureFamily, x: int, partition: ContextPartition,
                        N: int) -> MixedAction:
    """(1 - tau) Dirac(round(1/2)) + tau Dirac(f(x)), f reading group 0 on X0 and group 1 elsewhere"""
    _check_tau(tau)
    grid = CalibrationGrid(N)
    group = 0 if x in partition.x0 else 1
    tilted = grid.nearest_index(q_family.outcome_probability(x, group))
    return _mixture(tau, grid.nearest_index(0.5), tilted, N)


def conditional_label_mean(q_family: NatureFamily, Q: JointDistribution) -> float:
    """Q_bar = sum_x q^x(1) g0(x)"""
    g0 = Q.conditional(0).weights
    return float(sum(q_family.outcome_probability(x, 0) * g0[x] for x in range(Q.shape[0])))


def pareto_oracle_unaware(tau: float, q_family: NatureFamily, x: int, Q: JointDistribution,
                          N: int) -> MixedAction:
    """(1 - tau) Dirac(round(Q_bar)) + tau Dirac(round(q^x(1)))"""
    _check_tau(tau)
    grid = CalibrationGrid(N)
    base = grid.nearest_index(conditional_label_mean(q_family, Q))
    tilted = grid.nearest_index(q_family.outcome_probability(x, 0))
    return _mixture(tau, base, tilted, N)


class ParetoOracleAware(PlayerStrategy):
    name = "pareto_oracle_aware"

    def __init__(self, tau: float, q_family: NatureFamily, Q: JointDistribution, N: int):
        _check_tau(tau)
        self.tau = tau
        self.q_family = q_family
        self.partition = partition_contexts(Q)
        self.N = N
        self._actions = {}

    def mixed_action(self, x: int) -> MixedAction:
        if x not in self._actions:
            self._actions[x] = pareto_oracle_aware(self.tau, self.q_family, x, self.partition, self.N)
        return self._actions[x]


class ParetoOracleUnaware(PlayerStrategy):
    name = "pareto_oracle_unaware"

    def __init__(self, tau: float, q_family: NatureFamily, Q: JointDistribution, N: int):
        _check_tau(tau)
        self.tau = tau
        self.q_family = q_family
        self.Q = Q
        self.N = N
        self._actions = {}

    def mixed_action(self, x: int) -> MixedAction:
        if x not in self._actions:
            self._actions[x] = pareto_oracle_unaware(self.tau, self.q_family, x, self.Q, self.N)
        return self._actions[x]
