from dataclasses import replace
from decimal import Decimal
from typing import Any, Callable, Dict, List, Optional, Sequence
import logging

from Common.errors import DimensionError, SpecValidationError
from Factories.TargetSetFactory import TargetSetFactory
from Services.Objectives.objective_catalog import (
    KnowledgeMode, ObjectivePair, build_calibration, build_demographic_parity, build_equalized_payoffs,
    build_group_calibration, build_group_no_regret, build_no_regret, build_tilde_tradeoff, combine
)
from Services.Probability.finite_distributions import JointDistribution, tv_distance
from Services.Strategies.monitoring import Monitoring

logger = logging.getLogger(__name__)


def _float(params: Dict[str, Any], key: str, default: Any = None) -> float:
    value = params.get(key, default)
    if value is None:
        raise SpecValidationError(f"Missing objective parameter '{key}'")
    return float(Decimal(str(value)))


def _int(params: Dict[str, Any], key: str) -> int:
    if key not in params:
        raise SpecValidationError(f"Missing objective parameter '{key}'")
    return int(params[key])


def _reward(params: Dict[str, Any]):
    reward = params.get("r", params.get("reward"))
    if reward is None:
        raise SpecValidationError("Objective needs a reward tensor under 'r'")
    return reward


def default_calibration_slack(N: int) -> float:
    return 1.0 / N


def _tilde(params, Q, mode, monitoring) -> ObjectivePair:
    N = _int(params, "N")
    tv_value = tv_distance(Q.conditional(0), Q.conditional(1))
    epsilon = params.get("epsilon")
    delta = params.get("delta")
    return build_tilde_tradeoff(
        N, Q.gammas, tv_value, _float(params, "tau"), Q.space, monitoring,
        epsilon=None if epsilon is None else float(Decimal(str(epsilon))),
        delta=None if delta is None else float(Decimal(str(delta))),
        calibration_slack=_float(params, "calibration_slack", default_calibration_slack(N)),
    )


Builder = Callable[[Dict[str, Any], JointDistribution, KnowledgeMode, Monitoring], ObjectivePair]


class ObjectiveFactory:
    """
    Factory class for objective pairs by catalog name.

    Group frequencies always come from the simulated Q; gamma-dependent payoffs
    refuse to build outside known-Q mode.
    """

    _builders: Dict[str, Builder] = {
        "calibration": lambda p, Q, mode, mon: build_calibration(_int(p, "N"), Q.space),
        "group_calibration": lambda p, Q, mode, mon: build_group_calibration(_int(p, "N"), Q.gammas, Q.space, mode),
        "no_regret": lambda p, Q, mode, mon: build_no_regret(_reward(p)),
        "group_no_regret": lambda p, Q, mode, mon: build_group_no_regret(_reward(p)),
        "demographic_parity": lambda p, Q, mode, mon: build_demographic_parity(
            _int(p, "N"), Q.gammas, _float(p, "delta"), Q.space, mode),
        "equalized_payoffs": lambda p, Q, mode, mon: build_equalized_payoffs(
            _reward(p), Q.gammas, _float(p, "epsilon"), mode),
        "tilde_tradeoff": _tilde,
    }

    @classmethod
    def create_objective(cls, name: str, params: Dict[str, Any], Q: JointDistribution,
                         knowledge_mode: KnowledgeMode = KnowledgeMode.KNOWN_Q,
                         monitoring: Monitoring = Monitoring.UNAWARE) -> ObjectivePair:
        builder = cls._builders.get(name)
        if builder is None:
            raise SpecValidationError(f"Unknown objective '{name}'; known: {sorted(cls._builders)}")
        pair = builder(params or {}, Q, KnowledgeMode(knowledge_mode), Monitoring(monitoring))
        logger.debug(f"Built objective '{name}' of dimension {pair.dim}")
        return pair

    @classmethod
    def create_combined(cls, components: Sequence[Dict[str, Any]], Q: JointDistribution,
                        knowledge_mode: KnowledgeMode = KnowledgeMode.KNOWN_Q,
                        monitoring: Monitoring = Monitoring.UNAWARE) -> ObjectivePair:
        """components: [{"name": ..., "params": {...}, "target": {...}?}, ...] joined with combine()"""
        pairs: List[ObjectivePair] = [
            cls._with_target(
                cls.create_objective(component["name"], component.get("params", {}), Q, knowledge_mode, monitoring),
                component.get("target"))
            for component in components
        ]
        if not pairs:
            raise SpecValidationError("At least one objective is required")
        return combine(pairs)

    @staticmethod
    def _with_target(pair: ObjectivePair, target_config: Optional[Dict[str, Any]]) -> ObjectivePair:
        """Swap in a target built from its config record"""
        if target_config is None:
            return pair
        target = TargetSetFactory.create_target(target_config)
        try:
            pair = replace(pair, target=target)
        except DimensionError as e:
            raise SpecValidationError(f"Target override for '{pair.name}': {str(e)}") from e
        logger.info(f"Objective '{pair.name}' uses a configured {target_config['type']} target")
        return pair

    @classmethod
    def register_objective(cls, name: str, builder: Builder) -> None:
        """Register a new objective builder"""
        if not callable(builder):
            raise ValueError("Objective builder must be callable")
        cls._builders[name] = builder
