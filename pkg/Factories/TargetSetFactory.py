from decimal import Decimal
from typing import Any, Callable, Dict
import logging

from Common.errors import SpecValidationError
from Services.Geometry.target_sets import (
    Box, Intersection, Orthant, Product, TargetSet, WeightedL1Ball, WeightedSlab
)

logger = logging.getLogger(__name__)


def _number(value: Any) -> float:
    return float(Decimal(str(value)))


def _numbers(values) -> list:
    return [_number(value) for value in values]


class TargetSetFactory:
    """Factory class for rebuilding target sets from their config records"""

    _builders: Dict[str, Callable[[Dict], TargetSet]] = {
        "orthant": lambda config: Orthant(int(config["dim"])),
        "weighted_l1_ball": lambda config: WeightedL1Ball(_numbers(config["weights"]), _number(config["radius"])),
        "weighted_slab": lambda config: WeightedSlab(_numbers(config["normal"]), _number(config["half_width"])),
        "box": lambda config: Box(_numbers(config["lower"]), _numbers(config["upper"])),
        "product": lambda config: Product([TargetSetFactory.create_target(factor) for factor in config["factors"]],
                                          config.get("split")),
        "intersection": lambda config: Intersection(
            [TargetSetFactory.create_target(member) for member in config["members"]]),
    }

    @classmethod
    def create_target(cls, config: Dict) -> TargetSet:
        """Build a target set from a {"type": ..., ...} record"""
        kind = config.get("type") if isinstance(config, dict) else None
        builder = cls._builders.get(kind)
        if builder is None:
            raise SpecValidationError(f"Unknown target set type '{kind}'; known: {sorted(cls._builders)}")
        try:
            return builder(config)
        except KeyError as e:
            raise SpecValidationError(f"Target set '{kind}' is missing the field {str(e)}") from e

    @classmethod
    def register_target(cls, kind: str, builder: Callable[[Dict], TargetSet]) -> None:
        """Register a new target set type"""
        if not callable(builder):
            raise ValueError("Target set builder must be callable")
        cls._builders[kind] = builder
