"""
ExperimentSpec - pydantic models for the JSON experiment files.

Numerics are Decimal fields so a dump in JSON mode writes decimal strings and
parse -> dump -> parse is the identity.
"""

import json
from decimal import Decimal
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from Common.constants import CHECK_DEFAULT_RESOLUTIONS, CHECK_TOLERANCE
from Common.errors import SpecValidationError

# objective builders whose payoff embeds 1/gamma_s
GAMMA_DEPENDENT_OBJECTIVES = ("group_calibration", "demographic_parity", "equalized_payoffs")

# Blackwell players and the knowledge mode each one runs in
PLAYER_KNOWLEDGE_MODES = {
    "blackwell_known_q": "known_q",
    "blackwell_estimated_q": "estimated_q",
    "doubling_unknown_target": "unknown_target",
}

REWARD_KEYS = ("reward", "r")

RewardTable = List[List[List[List[Decimal]]]]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class InstanceSpec(_Strict):
    name: str
    x_labels: List[str]
    n_sensitive: int = Field(ge=1)
    q: List[Tuple[str, int, Decimal]]
    rewards: Dict[str, RewardTable] = Field(default_factory=dict)

    @field_validator("x_labels")
    @classmethod
    def _labels_unique(cls, labels: List[str]) -> List[str]:
        if not labels:
            raise ValueError("x_labels must not be empty")
        if len(set(labels)) != len(labels):
            raise ValueError(f"x_labels must be unique, got {labels}")
        return labels

    @model_validator(mode="after")
    def _triples_resolve(self) -> "InstanceSpec":
        for label, s, probability in self.q:
            if label not in self.x_labels:
                raise ValueError(f"q references unknown context label '{label}'")
            if not 0 <= s < self.n_sensitive:
                raise ValueError(f"q references group {s} outside 0..{self.n_sensitive - 1}")
            if probability < 0:
                raise ValueError(f"q has a negative probability {probability}")
        for name, tensor in self.rewards.items():
            shape = np.asarray(_to_float(tensor)).shape
            if len(shape) != 4:
                raise ValueError(f"Reward '{name}' must be indexed [a][b][x][s], got shape {shape}")
            if shape[2:] != (len(self.x_labels), self.n_sensitive):
                raise ValueError(f"Reward '{name}' has context shape {shape[2:]}, "
                                 f"instance has {(len(self.x_labels), self.n_sensitive)}")
        return self


class ComponentSpec(_Strict):
    """Named objective or strategy with free-form parameters"""
    name: str
    params: Dict[str, Any] = Field(default_factory=dict)


class ObjectiveSpec(ComponentSpec):
    """Objective component; an optional target record replaces the catalog target"""
    target: Optional[Dict[str, Any]] = None

    @field_validator("target")
    @classmethod
    def _tagged_record(cls, target: Optional[Dict[str, Any]]) -> Optional[Dict[str, Any]]:
        if target is not None and not isinstance(target.get("type"), str):
            raise ValueError("target must be a record with a string 'type' field")
        return target


class ParetoSpec(_Strict):
    taus: List[Decimal]
    N: int = Field(ge=2)

    @field_validator("taus")
    @classmethod
    def _taus_in_unit_interval(cls, taus: List[Decimal]) -> List[Decimal]:
        if not taus:
            raise ValueError("taus must not be empty")
        if any(not Decimal(0) <= tau <= Decimal(1) for tau in taus):
            raise ValueError("every tau must lie in [0, 1]")
        return taus


class CheckSpec(_Strict):
    resolutions: List[Decimal] = Field(default_factory=lambda: [Decimal(r) for r in CHECK_DEFAULT_RESOLUTIONS])
    tolerance: Decimal = Decimal(repr(CHECK_TOLERANCE))

    @field_validator("resolutions")
    @classmethod
    def _positive_resolutions(cls, resolutions: List[Decimal]) -> List[Decimal]:
        if not resolutions or any(not Decimal(0) < r <= Decimal(1) for r in resolutions):
            raise ValueError("resolutions must be a non-empty list of values in (0, 1]")
        return resolutions


class MetricsSpec(_Strict):
    N: Optional[int] = Field(default=None, ge=2)
    reward: Optional[str] = None


class ExperimentSpec(_Strict):
    instance: InstanceSpec
    objectives: List[ObjectiveSpec] = Field(default_factory=list)
    player: Optional[ComponentSpec] = None
    nature: Optional[ComponentSpec] = None
    monitoring: str = "unaware"
    horizon: int = Field(ge=1)
    seeds: List[int]
    knowledge_mode: str = "known_q"
    pareto: Optional[ParetoSpec] = None
    check: CheckSpec = Field(default_factory=CheckSpec)
    metrics: MetricsSpec = Field(default_factory=MetricsSpec)
    output_dir: Optional[str] = None

    @field_validator("monitoring")
    @classmethod
    def _known_monitoring(cls, value: str) -> str:
        if value not in ("aware", "unaware"):
            raise ValueError(f"monitoring must be 'aware' or 'unaware', got '{value}'")
        return value

    @field_validator("knowledge_mode")
    @classmethod
    def _known_mode(cls, value: str) -> str:
        if value not in ("known_q", "estimated_q", "unknown_target"):
            raise ValueError(f"knowledge_mode must be known_q, estimated_q or unknown_target, got '{value}'")
        return value

    @field_validator("seeds")
    @classmethod
    def _unique_seeds(cls, seeds: List[int]) -> List[int]:
        if not seeds:
            raise ValueError("seeds must not be empty")
        if len(set(seeds)) != len(seeds):
            raise ValueError("seeds must be unique")
        return seeds

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentSpec":
        if self.knowledge_mode != "known_q":
            for objective in self.objectives:
                if objective.name in GAMMA_DEPENDENT_OBJECTIVES:
                    raise ValueError(
                        f"gamma-dependent payoff '{objective.name}' is only allowed in known_q mode "
                        f"(knowledge_mode is '{self.knowledge_mode}'); use 'tilde_tradeoff' instead"
                    )
        if self.player is not None and self.player.name in PLAYER_KNOWLEDGE_MODES:
            expected = PLAYER_KNOWLEDGE_MODES[self.player.name]
            if expected != self.knowledge_mode:
                raise ValueError(f"player '{self.player.name}' runs in {expected} mode, "
                                 f"but knowledge_mode is '{self.knowledge_mode}'")
        for reference in self._reward_references():
            if reference not in self.instance.rewards:
                raise ValueError(f"reward '{reference}' is not defined in instance.rewards")
        return self

    def _reward_references(self) -> List[str]:
        references = []
        components = list(self.objectives) + [c for c in (self.player, self.nature) if c is not None]
        for component in components:
            for key in REWARD_KEYS:
                if isinstance(component.params.get(key), str):
                    references.append(component.params[key])
        if self.metrics.reward is not None:
            references.append(self.metrics.reward)
        return references

    def reward_tensor(self, name: str) -> np.ndarray:
        if name not in self.instance.rewards:
            raise SpecValidationError(f"reward '{name}' is not defined in instance.rewards")
        return np.asarray(_to_float(self.instance.rewards[name]), dtype=float)

    def resolve_params(self, params: Dict[str, Any]) -> Dict[str, Any]:
        """Replace reward references by their tensors"""
        resolved = dict(params)
        for key in REWARD_KEYS:
            if isinstance(resolved.get(key), str):
                resolved[key] = self.reward_tensor(resolved[key])
        return resolved

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True)


def _to_float(value: Any) -> Any:
    if isinstance(value, list):
        return [_to_float(item) for item in value]
    return float(value)


def parse_spec(payload: Union[str, Dict]) -> ExperimentSpec:
    """
    Validate an experiment spec given as JSON text or a decoded object.

    Raises:
        SpecValidationError: With every schema or consistency problem listed
    """
    try:
        if isinstance(payload, str):
            return ExperimentSpec.model_validate_json(payload)
        return ExperimentSpec.model_validate(payload)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in error['loc']) or 'spec'}: {error['msg']}"
                             for error in e.errors())
        raise SpecValidationError(f"Invalid experiment spec: {problems}") from e


def load_spec(path: Union[str, Path]) -> ExperimentSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SpecValidationError(f"Cannot read spec {path}: {str(e)}") from e
    return parse_spec(text)
