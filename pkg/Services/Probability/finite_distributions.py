"""
Finite probability primitives - mixed actions, joint context distributions,
marginals/conditionals, total variation and seeded sampling.
"""

import logging
from dataclasses import dataclass, field
from decimal import Decimal
from functools import cached_property
from typing import List, Sequence, Tuple, Union

import numpy as np

from Common.constants import PROBABILITY_TOLERANCE, RENORMALIZATION_TOLERANCE
from Common.errors import (
    DegenerateGroupError, DimensionError, InvalidDistributionError
)

logger = logging.getLogger(__name__)


def _normalize(weights: Sequence[float], name: str) -> np.ndarray:
    """
    Validate a probability array and absorb float drift.

    Args:
        weights: Array of nonnegative weights of any shape
        name: Label used in error messages

    Returns:
        Read-only float array summing to 1

    Raises:
        InvalidDistributionError: If the weights are not a probability array
    """
    array = np.array(weights, dtype=float)
    if array.size == 0:
        raise InvalidDistributionError(f"{name} must have at least one element")
    if not np.all(np.isfinite(array)):
        raise InvalidDistributionError(f"{name} has non-finite weights: {array}")
    if np.any(array < -PROBABILITY_TOLERANCE):
        raise InvalidDistributionError(f"{name} has negative weights: {array}")
    array = np.clip(array, 0.0, None)
    total = array.sum()
    if abs(total - 1.0) > RENORMALIZATION_TOLERANCE:
        raise InvalidDistributionError(f"{name} sums to {total!r}, expected 1")
    array = array / total
    array.flags.writeable = False
    return array


def _as_decimal_string(value: float) -> str:
    return format(Decimal(repr(float(value))), "f")


@dataclass(frozen=True, eq=False)
class MixedAction:
    """Probability vector over an indexed finite set"""
    weights: np.ndarray

    def __post_init__(self):
        array = _normalize(self.weights, "MixedAction")
        if array.ndim != 1:
            raise DimensionError(f"MixedAction weights must be a vector, got shape {array.shape}")
        object.__setattr__(self, "weights", array)

    @classmethod
    def uniform(cls, size: int) -> "MixedAction":
        if size < 1:
            raise InvalidDistributionError("MixedAction needs at least one element")
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def dirac(cls, size: int, index: int) -> "MixedAction":
        if not 0 <= index < size:
            raise DimensionError(f"Dirac index {index} out of range for size {size}")
        weights = np.zeros(size)
        weights[index] = 1.0
        return cls(weights)

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    @cached_property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.weights)

    @cached_property
    def support_end(self) -> int:
        return int(np.flatnonzero(self.weights > 0)[-1])

    def is_dirac(self) -> bool:
        return bool(np.isclose(self.weights.max(), 1.0, atol=PROBABILITY_TOLERANCE))

    def __eq__(self, other) -> bool:
        return isinstance(other, MixedAction) and np.array_equal(self.weights, other.weights)

    def __hash__(self) -> int:
        return hash(self.weights.tobytes())

    def __repr__(self) -> str:
        return f"MixedAction({np.array2string(self.weights, precision=6)})"


@dataclass(frozen=True)
class ContextSpace:
    """Non-sensitive contexts X (labelled) and sensitive groups S = {0..|S|-1}"""
    x_labels: Tuple[str, ...]
    n_sensitive: int

    def __post_init__(self):
        labels = tuple(str(label) for label in self.x_labels)
        object.__setattr__(self, "x_labels", labels)
        if len(labels) < 1:
            raise DimensionError("ContextSpace needs at least one context")
        if self.n_sensitive < 1:
            raise DimensionError("ContextSpace needs at least one sensitive group")
        if len(set(labels)) != len(labels):
            raise DimensionError(f"Context labels must be unique: {labels}")

    @classmethod
    def indexed(cls, n_contexts: int, n_sensitive: int) -> "ContextSpace":
        return cls(tuple(f"x{i}" for i in range(n_contexts)), n_sensitive)

    @property
    def n_contexts(self) -> int:
        return len(self.x_labels)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n_contexts, self.n_sensitive)

    def index_of(self, label: str) -> int:
        try:
            return self.x_labels.index(label)
        except ValueError:
            raise DimensionError(f"Unknown context label '{label}'")


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Table q[x][s] over X x S"""
    table: np.ndarray
    space: ContextSpace = field(default=None)

    def __post_init__(self):
        array = _normalize(self.table, "JointDistribution")
        if array.ndim != 2:
            raise DimensionError(f"JointDistribution table must be 2-D, got shape {array.shape}")
        space = self.space or ContextSpace.indexed(*array.shape)
        if space.shape != array.shape:
            raise DimensionError(f"Table shape {array.shape} does not match space {space.shape}")
        object.__setattr__(self, "table", array)
        object.__setattr__(self, "space", space)

    @classmethod
    def from_conditionals(cls, gammas: Sequence[float], conditionals: Sequence[Sequence[float]],
                          space: ContextSpace = None) -> "JointDistribution":
        """Build q[x][s] = gamma_s * Q^s(x)"""
        gammas = np.asarray(gammas, dtype=float)
        conditionals = np.asarray(conditionals, dtype=float)
        if conditionals.shape[0] != gammas.shape[0]:
            raise DimensionError("One conditional per group is required")
        return cls((conditionals * gammas[:, None]).T, space)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.table.shape

    @cached_property
    def gammas(self) -> np.ndarray:
        return marginal_gamma(self)

    @cached_property
    def x_marginal(self) -> MixedAction:
        return MixedAction(self.table.sum(axis=1))

    @cached_property
    def flat_cumulative(self) -> np.ndarray:
        return np.cumsum(self.table.ravel())

    @cached_property
    def flat_support_end(self) -> int:
        return int(np.flatnonzero(self.table.ravel() > 0)[-1])

    def conditional(self, s: int) -> MixedAction:
        return conditional_given_s(self, s)

    def to_config(self) -> List[List[str]]:
        """Serialize as (x_label, s_index, probability) triples with decimal strings"""
        triples = []
        for x, label in enumerate(self.space.x_labels):
            for s in range(self.space.n_sensitive):
                if self.table[x, s] > 0:
                    triples.append([label, s, _as_decimal_string(self.table[x, s])])
        return triples

    @classmethod
    def from_config(cls, triples: Sequence[Sequence], space: ContextSpace) -> "JointDistribution":
        table = np.zeros(space.shape)
        for entry in triples:
            if len(entry) != 3:
                raise InvalidDistributionError(f"Expected (x_label, s_index, probability), got {entry}")
            label, s, probability = entry
            s = int(s)
            if not 0 <= s < space.n_sensitive:
                raise DimensionError(f"Group index {s} out of range")
            table[space.index_of(label), s] += float(Decimal(str(probability)))
        return cls(table, space)

    def __eq__(self, other) -> bool:
        return (isinstance(other, JointDistribution) and self.space == other.space
                and np.array_equal(self.table, other.table))

    def __hash__(self) -> int:
        return hash((self.space, self.table.tobytes()))


Distribution = Union[JointDistribution, MixedAction]


def _weights_of(dist: Union[Distribution, np.ndarray]) -> np.ndarray:
    if isinstance(dist, JointDistribution):
        return dist.table
    if isinstance(dist, MixedAction):
        return dist.weights
    return np.asarray(dist, dtype=float)


def tv_distance(p: Union[Distribution, np.ndarray], q: Union[Distribution, np.ndarray]) -> float:
    """Half l1 distance between two same-shaped distributions"""
    left, right = _weights_of(p), _weights_of(q)
    if left.shape != right.shape:
        raise DimensionError(f"Cannot compare distributions of shapes {left.shape} and {right.shape}")
    return float(min(1.0, 0.5 * np.abs(left - right).sum()))


def marginal_gamma(Q: JointDistribution) -> np.ndarray:
    gammas = Q.table.sum(axis=0)
    gammas.flags.writeable = False
    return gammas


def conditional_given_s(Q: JointDistribution, s: int) -> MixedAction:
    """
    Conditional distribution Q^s of x given the group s.

    Raises:
        DegenerateGroupError: If gamma_s = 0
    """
    if not 0 <= s < Q.space.n_sensitive:
        raise DimensionError(f"Group index {s} out of range")
    gamma = Q.table[:, s].sum()
    if gamma <= 0.0:
        raise DegenerateGroupError(f"Group {s} has zero probability; its conditional is undefined")
    return MixedAction(Q.table[:, s] / gamma)


@dataclass(frozen=True)
class ContextPartition:
    """X0 = {g0 > g1}, X1 = {g1 > g0}, Xeq = {g0 = g1} for the group conditionals g_s"""
    x0: Tuple[int, ...]
    x1: Tuple[int, ...]
    x_eq: Tuple[int, ...]

    def region(self, x: int) -> str:
        if x in self.x0:
            return "x0"
        return "x1" if x in self.x1 else "x_eq"


def partition_contexts(Q: JointDistribution) -> ContextPartition:
    if Q.space.n_sensitive != 2:
        raise DimensionError("Context partition needs exactly two sensitive groups")
    g0 = conditional_given_s(Q, 0).weights
    g1 = conditional_given_s(Q, 1).weights
    gaps = g0 - g1
    x0 = tuple(int(x) for x in np.flatnonzero(gaps > PROBABILITY_TOLERANCE))
    x1 = tuple(int(x) for x in np.flatnonzero(gaps < -PROBABILITY_TOLERANCE))
    x_eq = tuple(int(x) for x in np.flatnonzero(np.abs(gaps) <= PROBABILITY_TOLERANCE))
    return ContextPartition(x0, x1, x_eq)


def sample(dist: Distribution, rng: np.random.Generator) -> Union[int, Tuple[int, int]]:
    """
    Draw one index by inverse-CDF sampling with one uniform from rng.

    Returns an index for a MixedAction and an (x, s) pair for a JointDistribution.
    """
    if isinstance(dist, JointDistribution):
        flat = min(_draw(dist.flat_cumulative, rng.random()), dist.flat_support_end)
        return divmod(flat, dist.space.n_sensitive)
    index = _draw(dist.cumulative, rng.random())
    return min(index, dist.support_end)


def _draw(cumulative: np.ndarray, u: float) -> int:
    index = int(np.searchsorted(cumulative, u, side="right"))
    return min(index, cumulative.shape[0] - 1)


@dataclass
class RandomStreams:
    """
    Independent generators for context, player and nature draws.

    Streams are the three children of SeedSequence(seed), spawned in that order.
    Each engine run owns its streams.
    """
    seed: int
    context: np.random.Generator
    player: np.random.Generator
    nature: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "RandomStreams":
        children = np.random.SeedSequence(seed).spawn(3)
        context, player, nature = (np.random.Generator(np.random.PCG64(child)) for child in children)
        return cls(seed=seed, context=context, player=player, nature=nature)


def make_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
