from decimal import Decimal
from typing import Any, Callable, Dict, Optional
import logging

from Common.errors import SpecValidationError
from Factories.ObjectiveFactory import default_calibration_slack
from Services.Objectives.objective_catalog import ObjectivePair
from Services.Probability.finite_distributions import JointDistribution
from Services.Strategies.monitoring import Monitoring
from Services.Strategies.nature_strategies import (
    BestResponseNature, NatureStrategy, catalog_names, nature_catalog
)
from Services.Strategies.player_strategies import (
    BlackwellEstimatedQ, BlackwellKnownQ, ConstantForecast, DoublingUnknownTarget, ParetoOracleAware,
    ParetoOracleUnaware, PlayerStrategy
)

logger = logging.getLogger(__name__)


def _float(params: Dict[str, Any], key: str, default: Any = None) -> float:
    value = params.get(key, default)
    if value is None:
        raise SpecValidationError(f"Missing strategy parameter '{key}'")
    return float(Decimal(str(value)))


def _int(params: Dict[str, Any], key: str) -> int:
    if key not in params:
        raise SpecValidationError(f"Missing strategy parameter '{key}'")
    return int(params[key])


def _oracle_family(nature: Optional[NatureStrategy], name: str):
    family = nature.family if nature is not None else None
    if family is None:
        raise SpecValidationError(f"Player '{name}' needs a stationary Nature to read its family from")
    return family


def _doubling(params, pair: ObjectivePair, Q: JointDistribution, monitoring: Monitoring, nature):
    N = _int(params, "N")
    if pair.dim != 2 * N + 2:
        raise SpecValidationError(
            f"doubling_unknown_target with N={N} steers in R^{2 * N + 2}; objective '{pair.name}' has dimension {pair.dim}")
    return DoublingUnknownTarget(pair, N, _float(params, "tau"), Q.space, monitoring,
                                 _float(params, "calibration_slack", default_calibration_slack(N)))


def _constant(params, pair: ObjectivePair, Q, monitoring, nature):
    k = _int(params, "k")
    if not 0 <= k < pair.payoff.n_actions:
        raise SpecValidationError(f"constant_forecast index {k} outside 0..{pair.payoff.n_actions - 1}")
    return ConstantForecast(k, pair.payoff.n_actions)


PlayerBuilder = Callable[..., PlayerStrategy]


class StrategyFactory:
    """Factory class for Player and Nature strategies; one fresh instance per run"""

    _players: Dict[str, PlayerBuilder] = {
        "blackwell_known_q": lambda params, pair, Q, monitoring, nature: BlackwellKnownQ(pair, Q, monitoring),
        "blackwell_estimated_q": lambda params, pair, Q, monitoring, nature: BlackwellEstimatedQ(
            pair, Q.space, monitoring),
        "doubling_unknown_target": _doubling,
        "constant_forecast": _constant,
        "pareto_oracle_aware": lambda params, pair, Q, monitoring, nature: ParetoOracleAware(
            _float(params, "tau"), _oracle_family(nature, "pareto_oracle_aware"), Q, _int(params, "N")),
        "pareto_oracle_unaware": lambda params, pair, Q, monitoring, nature: ParetoOracleUnaware(
            _float(params, "tau"), _oracle_family(nature, "pareto_oracle_unaware"), Q, _int(params, "N")),
    }

    @classmethod
    def create_player(cls, name: str, params: Dict[str, Any], pair: ObjectivePair, Q: JointDistribution,
                      monitoring: Monitoring, nature: Optional[NatureStrategy] = None) -> PlayerStrategy:
        builder = cls._players.get(name)
        if builder is None:
            raise SpecValidationError(f"Unknown player strategy '{name}'; known: {sorted(cls._players)}")
        return builder(params or {}, pair, Q, Monitoring(monitoring), nature)

    @classmethod
    def create_nature(cls, name: str, params: Dict[str, Any], pair: ObjectivePair, Q: JointDistribution,
                      monitoring: Monitoring) -> NatureStrategy:
        monitoring = Monitoring(monitoring)
        if name == "best_response":
            return BestResponseNature(pair, Q, monitoring)
        nature = nature_catalog(name, params, Q)
        if nature.monitoring is Monitoring.AWARE and monitoring is Monitoring.UNAWARE:
            raise SpecValidationError(f"Nature '{name}' reads the sensitive group but monitoring is unaware")
        return nature

    @classmethod
    def player_names(cls) -> tuple:
        return tuple(sorted(cls._players))

    @classmethod
    def nature_names(cls) -> tuple:
        return ("best_response",) + catalog_names()

    @classmethod
    def register_player(cls, name: str, builder: PlayerBuilder) -> None:
        """Register a new player strategy builder"""
        if not callable(builder):
            raise ValueError("Player builder must be callable")
        cls._players[name] = builder
