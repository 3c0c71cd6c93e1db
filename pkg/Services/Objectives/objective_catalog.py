"""
ObjectiveCatalog - (payoff tensor, convex target set) pairs for calibration,
no-regret, demographic parity, equalized payoffs and the gamma-free tradeoff.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from Common.constants import TIE_TOLERANCE
from Common.errors import (
    DegenerateGroupError, DimensionError, GammaDependenceError, UnsupportedCardinalityError
)
from Services.Geometry.target_sets import (
    Box, Intersection, Orthant, Product, TargetSet, WeightedL1Ball, WeightedSlab
)
from Services.Objectives.payoff_tensor import PayoffTensor
from Services.Pareto.frontier import tradeoff_budgets
from Services.Probability.finite_distributions import ContextSpace
from Services.Strategies.monitoring import Monitoring

logger = logging.getLogger(__name__)


class KnowledgeMode(str, Enum):
    KNOWN_Q = "known_q"
    ESTIMATED_Q = "estimated_q"
    UNKNOWN_TARGET = "unknown_target"


@dataclass(frozen=True)
class CalibrationGrid:
    """Forecast levels a_k = (k - 1/2)/N, stored 0-indexed"""
    N: int

    def __post_init__(self):
        if self.N < 2:
            raise DimensionError(f"Calibration grid needs N >= 2, got {self.N}")

    @cached_property
    def levels(self) -> np.ndarray:
        levels = (np.arange(1, self.N + 1) - 0.5) / self.N
        levels.flags.writeable = False
        return levels

    def nearest_index(self, p: float) -> int:
        """Index of the level closest to p; exact ties go to the smaller level"""
        gaps = np.abs(self.levels - p)
        index = int(np.flatnonzero(gaps <= gaps.min() + TIE_TOLERANCE)[0])
        return index

    def round(self, p: float) -> float:
        return float(self.levels[self.nearest_index(p)])


@dataclass(frozen=True)
class ObjectivePair:
    payoff: PayoffTensor
    target: TargetSet
    name: str
    gamma_dependence: bool = False

    def __post_init__(self):
        if self.payoff.dim != self.target.dim:
            raise DimensionError(f"Payoff dimension {self.payoff.dim} differs from target dimension {self.target.dim}")

    @property
    def dim(self) -> int:
        return self.payoff.dim

    def range_constant(self) -> float:
        """
        Payoff-range constant K of the L2 rate bound.

        Bounds ||m_{t+1} - c_t||^2 by (diameter of the payoff support + largest
        distance of a payoff to the target)^2.
        """
        support = self.payoff.support()
        distances = np.array([self.target.distance(v) for v in support])
        differences = support[:, None, :] - support[None, :, :]
        diameter = float(np.linalg.norm(differences, axis=-1).max())
        return (diameter + float(distances.max())) ** 2


def _space(space: Optional[ContextSpace], n_groups: int = 1) -> ContextSpace:
    return space if space is not None else ContextSpace.indexed(1, n_groups)


def _require_gammas(gammas: Sequence[float], space: ContextSpace) -> np.ndarray:
    gammas = np.asarray(gammas, dtype=float)
    if gammas.shape != (space.n_sensitive,):
        raise DimensionError(f"Expected {space.n_sensitive} group frequencies, got {gammas.shape}")
    if np.any(gammas <= 0):
        raise DegenerateGroupError(f"All group frequencies must be positive, got {gammas.tolist()}")
    return gammas


def _require_two_groups(space: ContextSpace, name: str) -> None:
    if space.n_sensitive != 2:
        raise UnsupportedCardinalityError(f"{name} is defined for |S| = 2, got |S| = {space.n_sensitive}")


def _require_known(knowledge_mode: KnowledgeMode, name: str) -> None:
    if KnowledgeMode(knowledge_mode) is not KnowledgeMode.KNOWN_Q:
        raise GammaDependenceError(
            f"{name} embeds 1/gamma_s and is only available when Q is known; "
            f"use tilde_tradeoff in {KnowledgeMode(knowledge_mode).value} mode")


def _rewards(r: Sequence) -> np.ndarray:
    rewards = np.asarray(r, dtype=float)
    if rewards.ndim != 4:
        raise DimensionError(f"Reward tensor must be indexed [a, b, x, s], got shape {rewards.shape}")
    if not np.all(np.isfinite(rewards)):
        raise DimensionError("Reward tensor must be finite")
    return rewards


def _calibration_entries(N: int, space: ContextSpace) -> np.ndarray:
    """m^cal(k, b) = (a_k - b) e_k, broadcast over (x, s)"""
    levels = CalibrationGrid(N).levels
    entries = np.zeros((N, 2, space.n_contexts, space.n_sensitive, N))
    for k in range(N):
        for b in range(2):
            entries[k, b, :, :, k] = levels[k] - b
    return entries


def build_calibration(N: int, space: Optional[ContextSpace] = None) -> ObjectivePair:
    space = _space(space)
    payoff = PayoffTensor(_calibration_entries(N, space))
    return ObjectivePair(payoff, WeightedL1Ball(np.ones(N), 1.0 / N), "calibration")


def build_group_calibration(N: int, gammas: Sequence[float], space: Optional[ContextSpace] = None,
                            knowledge_mode: KnowledgeMode = KnowledgeMode.KNOWN_Q) -> ObjectivePair:
    _require_known(knowledge_mode, "group_calibration")
    space = _space(space, len(gammas))
    gammas = _require_gammas(gammas, space)
    base = _calibration_entries(N, space)
    n_groups = space.n_sensitive
    entries = np.zeros(base.shape[:4] + (N * n_groups,))
    for s in range(n_groups):
        entries[:, :, :, s, s * N:(s + 1) * N] = base[:, :, :, s, :] / gammas[s]
    target = WeightedL1Ball(np.ones(N * n_groups), 1.0 / N)
    return ObjectivePair(PayoffTensor(entries), target, "group_calibration", gamma_dependence=True)


def build_no_regret(r: Sequence) -> ObjectivePair:
    rewards = _rewards(r)
    # coordinate a' holds r(a, ...) - r(a', ...)
    entries = rewards[..., None] - np.moveaxis(rewards, 0, -1)[None, ...]
    return ObjectivePair(PayoffTensor(entries), Orthant(rewards.shape[0]), "no_regret")


def build_group_no_regret(r: Sequence) -> ObjectivePair:
    rewards = _rewards(r)
    n_actions, n_groups = rewards.shape[0], rewards.shape[3]
    regrets = rewards[..., None] - np.moveaxis(rewards, 0, -1)[None, ...]
    entries = np.zeros(rewards.shape + (n_actions * n_groups,))
    for s in range(n_groups):
        entries[:, :, :, s, s * n_actions:(s + 1) * n_actions] = regrets[:, :, :, s, :]
    return ObjectivePair(PayoffTensor(entries), Orthant(n_actions * n_groups), "group_no_regret")


def build_demographic_parity(N: int, gammas: Sequence[float], delta: float,
                             space: Optional[ContextSpace] = None,
                             knowledge_mode: KnowledgeMode = KnowledgeMode.KNOWN_Q) -> ObjectivePair:
    _require_known(knowledge_mode, "demographic_parity")
    space = _space(space, len(gammas))
    _require_two_groups(space, "demographic_parity")
    gammas = _require_gammas(gammas, space)
    levels = CalibrationGrid(N).levels
    entries = np.zeros((N, 2, space.n_contexts, 2, 2))
    for s in range(2):
        entries[:, :, :, s, s] = (levels / gammas[s])[:, None, None]
    target = WeightedSlab(np.array([1.0, -1.0]), delta)
    return ObjectivePair(PayoffTensor(entries), target, "demographic_parity", gamma_dependence=True)


def build_equalized_payoffs(r: Sequence, gammas: Sequence[float], epsilon: float,
                            knowledge_mode: KnowledgeMode = KnowledgeMode.KNOWN_Q) -> ObjectivePair:
    _require_known(knowledge_mode, "equalized_payoffs")
    rewards = _rewards(r)
    space = ContextSpace.indexed(rewards.shape[2], rewards.shape[3])
    _require_two_groups(space, "equalized_payoffs")
    gammas = _require_gammas(gammas, space)
    entries = np.zeros(rewards.shape + (2,))
    for s in range(2):
        entries[:, :, :, s, s] = rewards[:, :, :, s] / gammas[s]
    target = WeightedSlab(np.array([1.0, -1.0]), epsilon)
    return ObjectivePair(PayoffTensor(entries), target, "equalized_payoffs", gamma_dependence=True)


def tilde_target(N: int, gammas: Sequence[float], epsilon: float, delta: float) -> Product:
    """True tilde target: bounded weighted-l1 calibration set x box-restricted parity slab"""
    gammas = np.asarray(gammas, dtype=float)
    if gammas.shape != (2,) or np.any(gammas <= 0):
        raise DegenerateGroupError(f"The tilde target needs two positive group frequencies, got {gammas.tolist()}")
    calibration_weights = np.concatenate([np.full(N, 1.0 / gammas[0]), np.full(N, 1.0 / gammas[1])])
    calibration_set = Intersection([WeightedL1Ball.unit(2 * N), WeightedL1Ball(calibration_weights, epsilon)])
    parity_set = Intersection([Box.unit(2), WeightedSlab(np.array([1.0 / gammas[0], -1.0 / gammas[1]]), delta)])
    return Product([calibration_set, parity_set])


def tilde_payoff(N: int, space: ContextSpace) -> PayoffTensor:
    """Gamma-free payoff: calibration blocks without 1/gamma, then (a 1{s=0}, a 1{s=1})"""
    _require_two_groups(space, "tilde_tradeoff")
    base = _calibration_entries(N, space)
    levels = CalibrationGrid(N).levels
    entries = np.zeros(base.shape[:4] + (2 * N + 2,))
    for s in range(2):
        entries[:, :, :, s, s * N:(s + 1) * N] = base[:, :, :, s, :]
        entries[:, :, :, s, 2 * N + s] = levels[:, None, None]
    return PayoffTensor(entries)


def build_tilde_tradeoff(N: int, gammas: Sequence[float], tv_value: float, tau: float,
                         space: Optional[ContextSpace] = None,
                         monitoring: Monitoring = Monitoring.UNAWARE,
                         epsilon: Optional[float] = None, delta: Optional[float] = None,
                         calibration_slack: float = 0.0) -> ObjectivePair:
    """
    Gamma-free payoff with the gamma-dependent target.

    Explicit epsilon/delta take precedence over the budgets derived from (TV, tau).
    """
    space = _space(space, 2)
    default_epsilon, default_delta = tradeoff_budgets(tv_value, tau, monitoring, calibration_slack)
    epsilon = default_epsilon if epsilon is None else epsilon
    delta = default_delta if delta is None else delta
    target = tilde_target(N, gammas, epsilon, delta)
    return ObjectivePair(tilde_payoff(N, space), target, "tilde_tradeoff", gamma_dependence=False)


def combine(pairs: Sequence[ObjectivePair]) -> ObjectivePair:
    if not pairs:
        raise DimensionError("combine needs at least one objective pair")
    if len(pairs) == 1:
        return pairs[0]
    payoff = PayoffTensor.concat([pair.payoff for pair in pairs])
    target = Product([pair.target for pair in pairs])
    name = "+".join(pair.name for pair in pairs)
    return ObjectivePair(payoff, target, name, any(pair.gamma_dependence for pair in pairs))
