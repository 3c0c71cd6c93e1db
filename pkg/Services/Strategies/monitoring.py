"""
Monitoring operator G and stationary Nature families indexed by what Nature observes.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np

from Common.errors import DimensionError, InvalidDistributionError
from Services.Probability.finite_distributions import MixedAction


class Monitoring(str, Enum):
    AWARE = "aware"
    UNAWARE = "unaware"

    def observe(self, x: int, s: int) -> "Observation":
        if self is Monitoring.AWARE:
            return Observation(x, s)
        return Observation(x)


@dataclass(frozen=True)
class Observation:
    """G(x, s): (x,) under unaware monitoring, (x, s) under aware monitoring"""
    x: int
    s: Optional[int] = None


@dataclass(frozen=True, eq=False)
class NatureFamily:
    """
    Stationary Nature family q[x][s] over outcomes B.

    Under unaware monitoring every q[x][s] is the same for all s.
    """
    table: np.ndarray
    monitoring: Monitoring

    def __post_init__(self):
        array = np.array(self.table, dtype=float)
        if array.ndim != 3:
            raise DimensionError(f"NatureFamily table must be indexed [x, s, b], got shape {array.shape}")
        rows = array.reshape(-1, array.shape[-1])
        normalized = np.array([MixedAction(row).weights for row in rows]).reshape(array.shape)
        if self.monitoring is Monitoring.UNAWARE and not np.all(normalized == normalized[:, :1, :]):
            raise InvalidDistributionError("An unaware Nature family cannot depend on the sensitive group")
        normalized.flags.writeable = False
        object.__setattr__(self, "table", normalized)
        object.__setattr__(self, "monitoring", Monitoring(self.monitoring))

    @classmethod
    def from_unaware(cls, rows: Sequence[Sequence[float]], n_groups: int) -> "NatureFamily":
        rows = np.asarray(rows, dtype=float)
        return cls(np.repeat(rows[:, None, :], n_groups, axis=1), Monitoring.UNAWARE)

    @classmethod
    def from_aware(cls, table: Sequence[Sequence[Sequence[float]]]) -> "NatureFamily":
        return cls(np.asarray(table, dtype=float), Monitoring.AWARE)

    @property
    def n_outcomes(self) -> int:
        return self.table.shape[2]

    def mixed_action(self, observation: Observation) -> MixedAction:
        s = 0 if observation.s is None else observation.s
        if self.monitoring is Monitoring.AWARE and observation.s is None:
            raise DimensionError("An aware Nature family needs the sensitive group in its observation")
        return MixedAction(self.table[observation.x, s])

    def outcome_probability(self, x: int, s: int, b: int = 1) -> float:
        return float(self.table[x, s, b])

    def to_config(self) -> Dict:
        if self.monitoring is Monitoring.UNAWARE:
            rows: List = [[repr(float(w)) for w in row] for row in self.table[:, 0, :]]
        else:
            rows = [[[repr(float(w)) for w in row] for row in block] for block in self.table]
        return {"monitoring": self.monitoring.value, "table": rows}
