"""
PayoffTensor - dense vector payoff m(a, b, x, s) in R^d and its bilinear extension.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np

from Common.errors import DimensionError
from Services.Probability.finite_distributions import MixedAction


@dataclass(frozen=True, eq=False)
class PayoffTensor:
    """Entries indexed [a, b, x, s, coordinate]"""
    entries: np.ndarray

    def __post_init__(self):
        array = np.array(self.entries, dtype=float)
        if array.ndim != 5 or 0 in array.shape:
            raise DimensionError(f"PayoffTensor entries must have shape (A, B, X, S, d), got {array.shape}")
        if not np.all(np.isfinite(array)):
            raise DimensionError("PayoffTensor entries must be finite")
        array.flags.writeable = False
        object.__setattr__(self, "entries", array)

    @property
    def n_actions(self) -> int:
        return self.entries.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.entries.shape[1]

    @property
    def n_contexts(self) -> int:
        return self.entries.shape[2]

    @property
    def n_groups(self) -> int:
        return self.entries.shape[3]

    @property
    def dim(self) -> int:
        return self.entries.shape[4]

    @property
    def game_shape(self) -> Tuple[int, int, int, int]:
        return self.entries.shape[:4]

    @cached_property
    def bound(self) -> float:
        """||m||_{inf,2}: largest Euclidean norm over (a, b, x, s)"""
        return float(np.linalg.norm(self.entries, axis=-1).max())

    def support(self) -> np.ndarray:
        """All payoff vectors, one per row, duplicates removed"""
        return np.unique(self.entries.reshape(-1, self.dim), axis=0)

    def vector(self, a: int, b: int, x: int, s: int) -> np.ndarray:
        return self.entries[a, b, x, s]

    def evaluate(self, p: MixedAction, q: MixedAction, x: int, s: int) -> np.ndarray:
        """Bilinear extension m(p, q, x, s)"""
        return np.einsum("a,b,abd->d", p.weights, q.weights, self.entries[:, :, x, s])

    def scalarized(self, direction: np.ndarray, x: int) -> np.ndarray:
        """<direction, m(a, b, x, s)> as an array indexed [a, b, s]"""
        return self.entries[:, :, x, :, :] @ direction

    @staticmethod
    def concat(tensors: Sequence["PayoffTensor"]) -> "PayoffTensor":
        shapes = {tensor.game_shape for tensor in tensors}
        if len(shapes) != 1:
            raise DimensionError(f"Cannot concatenate payoffs over different game shapes {sorted(shapes)}")
        return PayoffTensor(np.concatenate([tensor.entries for tensor in tensors], axis=-1))
