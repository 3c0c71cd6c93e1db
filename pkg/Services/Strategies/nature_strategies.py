"""
Nature strategies - stationary families (including the hard instances used for
impossibility and lower-bound experiments) and the adversarial best response.
"""

import logging
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, Optional

import numpy as np

from Common.constants import TIE_TOLERANCE, ZERO_STEERING_THRESHOLD
from Common.errors import DimensionError, SpecValidationError
from Services.Objectives.objective_catalog import ObjectivePair
from Services.Probability.finite_distributions import JointDistribution, MixedAction, partition_contexts
from Services.Strategies.monitoring import Monitoring, NatureFamily, Observation
from Services.Strategies.player_strategies import blackwell_step
from utils.compensated_sum import CompensatedSum

logger = logging.getLogger(__name__)


class NatureStrategy(ABC):
    """Nature acts on G(x, s) only; the full round is revealed after both picks"""
    name = "nature"
    monitoring: Monitoring

    @abstractmethod
    def mixed_action(self, observation: Observation) -> MixedAction:
        pass

    def observe_round(self, x: int, s: int, a: int, b: int, payoff: np.ndarray) -> None:
        pass

    @property
    def family(self) -> Optional[NatureFamily]:
        """The stationary family, when Nature plays one"""
        return None


class StationaryNature(NatureStrategy):

    def __init__(self, family: NatureFamily, name: str = "stationary"):
        self._family = family
        self.monitoring = family.monitoring
        self.name = name

    @property
    def family(self) -> NatureFamily:
        return self._family

    def mixed_action(self, observation: Observation) -> MixedAction:
        return self._family.mixed_action(observation)


def nature_best_response(pair: ObjectivePair, Q: JointDistribution, monitoring: Monitoring,
                         m_bar: np.ndarray, c_bar: np.ndarray, observation: Observation) -> MixedAction:
    """
    Dirac at the outcome maximizing <m_bar - c_bar, expected payoff> against the
    Player's equilibrium action at this context; smallest index on ties.
    """
    payoff = pair.payoff
    n_outcomes = payoff.n_outcomes
    direction = m_bar - c_bar
    if n_outcomes == 1 or np.linalg.norm(direction) < ZERO_STEERING_THRESHOLD:
        return MixedAction.dirac(n_outcomes, 0)
    x = observation.x
    p = blackwell_step(pair, Q, m_bar, c_bar, monitoring, x)
    scalarized = payoff.scalarized(direction, x)
    if observation.s is not None:
        weights = np.zeros(payoff.n_groups)
        weights[observation.s] = 1.0
    else:
        weights = Q.table[x]
    values = p.weights @ np.tensordot(scalarized, weights, axes=([2], [0]))
    winners = np.flatnonzero(values >= values.max() - TIE_TOLERANCE)
    if winners.size > 1:
        logger.debug(f"Best-response tie among outcomes {winners.tolist()} at context {x}")
    return MixedAction.dirac(n_outcomes, int(winners[0]))


class BestResponseNature(NatureStrategy):
    """Adversary that knows the true Q and tracks the running average payoff"""
    name = "best_response"

    def __init__(self, pair: ObjectivePair, Q: JointDistribution, monitoring: Monitoring):
        self.pair = pair
        self.Q = Q
        self.monitoring = Monitoring(monitoring)
        self._payoffs = CompensatedSum(pair.dim)

    def observe_round(self, x: int, s: int, a: int, b: int, payoff: np.ndarray) -> None:
        self._payoffs.add(payoff)

    def mixed_action(self, observation: Observation) -> MixedAction:
        if self._payoffs.count == 0:
            return MixedAction.dirac(self.pair.payoff.n_outcomes, 0)
        m_bar = self._payoffs.mean()
        c_bar = self.pair.target.project(m_bar)
        return nature_best_response(self.pair, self.Q, self.monitoring, m_bar, c_bar, observation)


def _dirac_rows(outcomes: np.ndarray, n_outcomes: int) -> np.ndarray:
    return np.eye(n_outcomes)[outcomes]


def _counter_example_1(Q: JointDistribution, params: Dict[str, Any]) -> NatureFamily:
    n_outcomes = int(params.get("n_outcomes", 2))
    rows = _dirac_rows(np.zeros(Q.shape[0], dtype=int), n_outcomes)
    return NatureFamily.from_unaware(rows, Q.shape[1])


def _counter_example_2(Q: JointDistribution, params: Dict[str, Any]) -> NatureFamily:
    if Q.shape[1] != 2:
        raise DimensionError("counter_example_2 needs two sensitive groups")
    table = np.zeros(Q.shape + (2,))
    table[:, 0, 0] = 1.0
    table[:, 1, 1] = 1.0
    return NatureFamily.from_aware(table)


def _pareto_lower_aware(Q: JointDistribution, params: Dict[str, Any]) -> NatureFamily:
    if Q.shape[1] != 2:
        raise DimensionError("pareto_lower_aware needs two sensitive groups")
    table = np.zeros(Q.shape + (2,))
    table[:, 0, 1] = 1.0
    table[:, 1, 0] = 1.0
    return NatureFamily.from_aware(table)


def _pareto_lower_unaware(Q: JointDistribution, params: Dict[str, Any]) -> NatureFamily:
    partition = partition_contexts(Q)
    label_one = np.ones(Q.shape[0])
    label_one[list(partition.x0)] = 0.0
    rows = np.stack([1.0 - label_one, label_one], axis=1)
    return NatureFamily.from_unaware(rows, Q.shape[1])


def _equalized_payoff_impossibility(Q: JointDistribution, params: Dict[str, Any]) -> NatureFamily:
    if "epsilon" not in params:
        raise SpecValidationError("equalized_payoff_impossibility needs the parameter 'epsilon'")
    epsilon = float(params["epsilon"])
    partition = partition_contexts(Q)
    outcome_zero = np.full(Q.shape[0], 0.5 + epsilon)
    outcome_zero[list(partition.x0)] = 1.0
    rows = np.stack([outcome_zero, 1.0 - outcome_zero], axis=1)
    return NatureFamily.from_unaware(rows, Q.shape[1])


def _stationary(Q: JointDistribution, params: Dict[str, Any]) -> NatureFamily:
    if "table" not in params:
        raise SpecValidationError("stationary Nature needs a 'table' parameter")
    monitoring = Monitoring(params.get("monitoring", Monitoring.UNAWARE.value))
    table = np.asarray(params["table"], dtype=float)
    if monitoring is Monitoring.UNAWARE:
        return NatureFamily.from_unaware(table, Q.shape[1])
    return NatureFamily.from_aware(table)


_NATURE_FAMILIES: Dict[str, Callable[[JointDistribution, Dict[str, Any]], NatureFamily]] = {
    "counter_example_1": _counter_example_1,
    "counter_example_2": _counter_example_2,
    "pareto_lower_aware": _pareto_lower_aware,
    "pareto_lower_unaware": _pareto_lower_unaware,
    "equalized_payoff_impossibility": _equalized_payoff_impossibility,
    "stationary": _stationary,
}


def nature_catalog(name: str, params: Optional[Dict[str, Any]], Q: JointDistribution) -> StationaryNature:
    """
    Stationary Nature strategy from the catalog of hard instances.

    Raises:
        SpecValidationError: If the name is unknown or a parameter is missing
    """
    builder = _NATURE_FAMILIES.get(name)
    if builder is None:
        raise SpecValidationError(f"Unknown Nature strategy '{name}'; known: {sorted(_NATURE_FAMILIES)}")
    family = builder(Q, params or {})
    logger.debug(f"Built Nature family '{name}' ({family.monitoring.value})")
    return StationaryNature(family, name)


def catalog_names() -> tuple:
    return tuple(sorted(_NATURE_FAMILIES))
