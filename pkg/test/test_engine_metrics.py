"""
Game engine and trajectory metrics: hand-computed criteria, determinism,
metric flags and short simulated runs.
"""

import numpy as np
import pytest

from Common.errors import DimensionError, EngineError, UndefinedMetricError
from Factories.ObjectiveFactory import ObjectiveFactory
from Services.Engine.game_engine import RunConfig, averaged_squared_distance, final_distance, run
from Services.Engine.metrics import (
    MetricSuite, compute_metric_series, metric_calibration, metric_dp, metric_equalized_payoffs,
    metric_distance_series, metric_group_calibration, metric_group_regret, metric_rate_bound, metric_regret
)
from Services.Engine.trajectory import Trajectory, geometric_grid
from Services.Geometry.target_sets import Orthant, WeightedL1Ball
from Services.Objectives.objective_catalog import build_calibration, build_group_no_regret
from Services.Probability.finite_distributions import JointDistribution
from Services.Strategies.monitoring import Monitoring
from Services.Strategies.nature_strategies import BestResponseNature, nature_catalog
from Services.Strategies.player_strategies import BlackwellKnownQ, ConstantForecast, PlayerStrategy

# r(a, s): a^2 for group 0, (a - 1)^2 for group 1; indexed [a, b, x, s]
OVERLAP_REWARD = np.array([[[[0.0, 1.0]], [[0.0, 1.0]]], [[[1.0, 0.0]], [[1.0, 0.0]]]])
OVERLAP_Q = JointDistribution(np.array([[0.5, 0.5]]))


def _calibration_trajectory(rounds, N=2, n_groups=1):
    pair = build_calibration(N)
    traj = Trajectory(len(rounds), N, n_groups, calibration_N=N)
    for s, a, b in rounds:
        traj.append(0, s, a, b, pair.payoff.vector(a, b, 0, 0))
    return traj


class FailingPlayer(PlayerStrategy):
    name = "failing"

    def mixed_action(self, x):
        raise ValueError("no action available")


def test_geometric_grid():
    assert geometric_grid(8) == [1, 2, 4, 8]
    assert geometric_grid(10) == [1, 2, 4, 8, 10]
    assert geometric_grid(1) == [1]
    with pytest.raises(DimensionError):
        geometric_grid(0)


def test_calibration_example():
    traj = _calibration_trajectory([(0, 1, 0), (0, 1, 1)])
    assert metric_calibration(traj, 2) == pytest.approx(0.25)
    assert metric_calibration(traj, 2, upto=1) == pytest.approx(0.75)


def test_distance_series_on_grid():
    traj = _calibration_trajectory([(0, 1, 0), (0, 1, 1)])
    assert metric_distance_series(traj, WeightedL1Ball(np.ones(2), 100.0)) == [(1, 0.0), (2, 0.0)]
    series = metric_distance_series(traj, build_calibration(2).target)
    assert [t for t, _ in series] == [1, 2]
    assert all(d >= 0.0 for _, d in series)
    with pytest.raises(DimensionError):
        metric_distance_series(traj, Orthant(3))


def test_group_calibration_and_parity_example():
    traj = _calibration_trajectory([(0, 1, 1), (1, 0, 0)], n_groups=2)
    assert metric_dp(traj, [0.5, 0.5]) == pytest.approx(0.5)
    # group 0: |0.75 - 1| / (0.5 * 2); group 1: |0.25 - 0| / (0.5 * 2)
    assert metric_group_calibration(traj, 2, [0.5, 0.5]) == pytest.approx(0.5)


def test_parity_needs_both_groups():
    traj = _calibration_trajectory([(0, 1, 1), (0, 0, 0)], n_groups=2)
    with pytest.raises(UndefinedMetricError):
        metric_dp(traj, [0.5, 0.5])
    suite = MetricSuite(build_calibration(2).target, N=2, gammas=np.array([0.5, 0.5]))
    series = compute_metric_series(traj, suite)
    assert series["D_t"] == [None, None]
    assert set(traj.metric_flags["D_t"]) == {1, 2}
    assert series["C_t"][-1] == pytest.approx(metric_calibration(traj, 2))
    assert "P_t" not in series


def test_regret_and_equalized_payoffs_by_hand():
    traj = Trajectory(4, 1, 2)
    for s, a in [(0, 0), (0, 1), (1, 0), (1, 0)]:
        traj.append(0, s, a, 0, np.zeros(1))
    # played rewards: 0, 1, 1, 1
    assert metric_regret(traj, OVERLAP_REWARD) == pytest.approx(0.25)
    # group 0 regrets -1 against action 1 over its two rounds
    assert metric_group_regret(traj, OVERLAP_REWARD) == pytest.approx(-0.25)
    assert metric_group_regret(traj, OVERLAP_REWARD, gammas=[0.5, 0.5], normalized=True) == pytest.approx(-0.5)
    assert metric_equalized_payoffs(traj, OVERLAP_REWARD, [0.5, 0.5]) == pytest.approx(0.5)


def test_average_matches_recomputation():
    rounds = [(0, k % 2, (k // 3) % 2) for k in range(37)]
    traj = _calibration_trajectory(rounds)
    for t in (8, 16, 32, 37, 5):
        assert traj.average(t) == pytest.approx(traj.recompute_average(t), abs=1e-15)
    with pytest.raises(DimensionError):
        traj.append(0, 0, 0, 0, np.zeros(2))
    assert metric_rate_bound(4.0, 16) == 0.5


def _example1_config(Q, seed, horizon=64):
    pair = ObjectiveFactory.create_objective("calibration", {"N": 4}, Q)
    return RunConfig(Q, pair, BlackwellKnownQ(pair, Q, Monitoring.AWARE),
                     BestResponseNature(pair, Q, Monitoring.AWARE), Monitoring.AWARE, horizon, seed,
                     metric_suite=MetricSuite(pair.target, N=4, gammas=Q.gammas))


def test_runs_are_deterministic(example1_q):
    first = run(_example1_config(example1_q, 7))
    second = run(_example1_config(example1_q, 7))
    assert first.actions.tolist() == second.actions.tolist()
    assert first.outcomes.tolist() == second.outcomes.tolist()
    assert first.metric_series == second.metric_series
    assert first.seed == 7


def test_run_config_validation(example1_q):
    config = _example1_config(example1_q, 1)
    with pytest.raises(DimensionError):
        RunConfig(example1_q, config.pair, config.player, config.nature, Monitoring.AWARE, 0, 1)
    with pytest.raises(DimensionError):
        RunConfig(example1_q, config.pair, config.player, config.nature, Monitoring.AWARE, 8, 1, metric_grid=[9])
    with pytest.raises(DimensionError):
        RunConfig(OVERLAP_Q, config.pair, config.player, config.nature, Monitoring.AWARE, 8, 1)


def test_strategy_failure_becomes_engine_error(example1_q):
    config = _example1_config(example1_q, 1)
    config.player = FailingPlayer()
    with pytest.raises(EngineError) as info:
        run(config)
    assert info.value.round_index == 1
    assert info.value.state["player"] == "failing"


def test_constant_player_suffers_group_regret():
    pair = build_group_no_regret(OVERLAP_REWARD)
    nature = nature_catalog("counter_example_1", {}, OVERLAP_Q)
    config = RunConfig(OVERLAP_Q, pair, ConstantForecast(0, 2), nature, Monitoring.UNAWARE, 2000, 3,
                       metric_suite=MetricSuite(pair.target, reward=OVERLAP_REWARD))
    traj = run(config)
    assert traj.metric_series["Rgr_t"][-1] == pytest.approx(-0.5, abs=0.05)
    assert traj.metric_series["t"][-1] == 2000.0
    assert final_distance(traj, pair.target) > 0.3


def test_known_q_blackwell_approaches_example1_target(example1_q):
    pair = ObjectiveFactory.create_combined(
        [{"name": "calibration", "params": {"N": 10}},
         {"name": "demographic_parity", "params": {"N": 10, "delta": "0.1"}}], example1_q)
    horizon = 512
    trajectories = []
    for seed in (1, 2):
        config = RunConfig(example1_q, pair, BlackwellKnownQ(pair, example1_q, Monitoring.AWARE),
                           BestResponseNature(pair, example1_q, Monitoring.AWARE), Monitoring.AWARE,
                           horizon, seed)
        trajectories.append(run(config))
    bound = metric_rate_bound(pair.range_constant(), horizon)
    for traj in trajectories:
        assert final_distance(traj, pair.target) <= bound
    assert averaged_squared_distance(trajectories, pair.target) <= bound ** 2
