"""
GameEngine - plays the repeated Player-vs-Nature game round by round:
context draw, simultaneous picks, payoff reveal.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from Common.errors import ApproachabilityError, DimensionError, EngineError
from Services.Engine.metrics import MetricSuite, compute_metric_series
from Services.Engine.trajectory import Trajectory
from Services.Geometry.target_sets import TargetSet
from Services.Objectives.objective_catalog import ObjectivePair
from Services.Probability.finite_distributions import JointDistribution, RandomStreams, sample
from Services.Strategies.monitoring import Monitoring
from Services.Strategies.nature_strategies import NatureStrategy
from Services.Strategies.player_strategies import PlayerStrategy

logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """One trajectory: a fresh pair of strategy instances is expected per config"""
    Q: JointDistribution
    pair: ObjectivePair
    player: PlayerStrategy
    nature: NatureStrategy
    monitoring: Monitoring
    horizon: int
    seed: int
    metric_grid: Optional[List[int]] = None
    evaluation_target: Optional[TargetSet] = None
    metric_suite: Optional[MetricSuite] = field(default=None)

    def __post_init__(self):
        self.monitoring = Monitoring(self.monitoring)
        if self.horizon < 1:
            raise DimensionError(f"Horizon must be >= 1, got {self.horizon}")
        payoff = self.pair.payoff
        if (payoff.n_contexts, payoff.n_groups) != self.Q.shape:
            raise DimensionError(
                f"Payoff contexts {(payoff.n_contexts, payoff.n_groups)} do not match Q of shape {self.Q.shape}"
            )
        target = self.target
        if target.dim != payoff.dim:
            raise DimensionError(f"Evaluation target has dimension {target.dim}, payoff has {payoff.dim}")
        if self.metric_grid is not None and any(not 1 <= t <= self.horizon for t in self.metric_grid):
            raise DimensionError("Metric grid rounds must lie in 1..horizon")

    @property
    def target(self) -> TargetSet:
        return self.evaluation_target if self.evaluation_target is not None else self.pair.target


def _state_dump(config: RunConfig, traj: Trajectory, x: int, s: int) -> dict:
    return {
        "seed": config.seed,
        "player": config.player.name,
        "nature": config.nature.name,
        "x": x,
        "s": s,
        "m_bar": traj.m_bar.tolist() if traj.length else None,
    }


def run(config: RunConfig) -> Trajectory:
    """
    Play config.horizon rounds and return the frozen trajectory.

    Per round: (x, s) from the context stream; Nature sees G(x, s) and the
    Player sees x; b is drawn from the nature stream, then a from the player
    stream; both sides receive the round's feedback afterwards.

    Raises:
        EngineError: Any strategy or solver failure, with the round index and a state dump
    """
    suite = config.metric_suite or MetricSuite(target=config.target)
    payoff = config.pair.payoff
    streams = RandomStreams.from_seed(config.seed)
    traj = Trajectory(config.horizon, payoff.dim, config.Q.shape[1], grid=config.metric_grid,
                      calibration_N=suite.N)
    traj.seed = config.seed

    x = s = -1
    for t in range(1, config.horizon + 1):
        try:
            x, s = sample(config.Q, streams.context)
            observation = config.monitoring.observe(x, s)
            q = config.nature.mixed_action(observation)
            p = config.player.mixed_action(x)
            b = sample(q, streams.nature)
            a = sample(p, streams.player)
            m = payoff.vector(a, b, x, s)
            traj.append(x, s, a, b, m)
            config.player.observe_round(x, s, a, m)
            config.nature.observe_round(x, s, a, b, m)
        except (ApproachabilityError, ArithmeticError, ValueError, IndexError) as e:
            logger.error(f"Error in round {t} (seed {config.seed}): {str(e)}")
            raise EngineError(t, _state_dump(config, traj, x, s), e) from e

    compute_metric_series(traj, suite)
    traj.freeze()
    logger.debug(f"Run finished: seed {config.seed}, horizon {config.horizon}, "
                 f"d_T={suite.target.distance(traj.m_bar):.3e}")
    return traj


def final_distance(traj: Trajectory, target: TargetSet) -> float:
    return float(target.distance(traj.m_bar))


def averaged_squared_distance(trajectories: List[Trajectory], target: TargetSet) -> float:
    return float(np.mean([final_distance(traj, target) ** 2 for traj in trajectories]))
