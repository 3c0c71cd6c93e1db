"""
Frank-Wolfe inner minimization and the brute-force check of the dual condition
on the shipped instances.
"""

import json

import numpy as np
import pytest

from Common.errors import DimensionError, GridSizeError
from Common.experiment_spec import parse_spec
from Services.ExperimentService import ExperimentService
from Services.Geometry.target_sets import WeightedL1Ball
from Services.Solvers.condition_checker import (
    check_condition_bruteforce, check_condition_two_resolutions, grid_size, grid_steps, observed_cells,
    simplex_grid
)
from Services.Solvers.frank_wolfe import expected_payoff_columns, frank_wolfe_min_distance
from Services.Strategies.monitoring import Monitoring, NatureFamily
from Services.Strategies.nature_strategies import nature_catalog


def _service(config_path, name, **overrides):
    with open(config_path(name), "r", encoding="utf-8") as f:
        payload = json.load(f)
    payload.update(overrides)
    return ExperimentService(parse_spec(payload), workers=1)


def _example1_n4(config_path):
    return _service(config_path, "example1", objectives=[
        {"name": "calibration", "params": {"N": 4}},
        {"name": "demographic_parity", "params": {"N": 4, "delta": "0.1"}},
    ])


def test_grid_helpers(pareto_q):
    assert grid_steps(0.25) == 4
    with pytest.raises(DimensionError):
        grid_steps(0.3)
    assert simplex_grid(2, 2).tolist() == [[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]
    assert len(simplex_grid(3, 4)) == 15
    assert grid_size(2, 4, 2) == 25
    assert observed_cells(pareto_q, Monitoring.AWARE) == [(0, 0), (1, 0), (1, 1), (2, 1)]
    assert observed_cells(pareto_q, Monitoring.UNAWARE) == [(0,), (1,), (2,)]


def test_huge_target_is_reached_immediately(config_path):
    service = _example1_n4(config_path)
    pair = service.build_pair()
    family = NatureFamily.from_aware(np.full((2, 2, 2), 0.5))
    result = frank_wolfe_min_distance(pair.payoff, service.Q, family, WeightedL1Ball(np.ones(pair.dim), 100.0))
    assert result.distance == 0.0
    assert result.converged
    assert result.iterations == 0


def test_example1_families_are_approachable(config_path):
    service = _example1_n4(config_path)
    pair = service.build_pair()
    family = NatureFamily.from_aware([[[0.9, 0.1], [0.2, 0.8]], [[0.6, 0.4], [0.0, 1.0]]])
    result = frank_wolfe_min_distance(pair.payoff, service.Q, family, pair.target)
    assert result.distance <= 1e-3
    assert all(later <= earlier for earlier, later in zip(result.history, result.history[1:]))
    z = np.einsum("xa,xad->d", result.family, expected_payoff_columns(pair.payoff, service.Q, family))
    assert pair.target.distance(z) == pytest.approx(result.distance, abs=1e-9)


def test_overlapping_groups_leave_a_gap(config_path):
    service = _service(config_path, "counterexample1")
    pair = service.build_pair()
    family = nature_catalog("counter_example_1", {}, service.Q).family
    result = frank_wolfe_min_distance(pair.payoff, service.Q, family, pair.target)
    # best family plays (1/2, 1/2); each group keeps a regret of 1/2 in one coordinate
    assert result.distance == pytest.approx(0.5 * np.sqrt(0.5), abs=1e-6)
    assert result.mixed_action(0).weights == pytest.approx([0.5, 0.5], abs=1e-6)


def test_equalized_payoffs_conflict_with_no_regret(config_path):
    service = _service(config_path, "equalized_impossibility")
    pair = service.build_pair()
    family = nature_catalog("equalized_payoff_impossibility", {"epsilon": "0.1"}, service.Q).family
    assert frank_wolfe_min_distance(pair.payoff, service.Q, family, pair.target).distance > 0.05
    report = check_condition_bruteforce(pair.payoff, service.Q, pair.target, service.monitoring, 0.5)
    assert not report.satisfied
    assert report.n_families == 27


def test_example1_condition_holds(config_path):
    service = _example1_n4(config_path)
    pair = service.build_pair()
    report = check_condition_bruteforce(pair.payoff, service.Q, pair.target, Monitoring.AWARE, 0.5, workers=2)
    assert report.satisfied
    assert report.n_families == 81
    assert report.inner_distance <= 1e-3


def test_aware_counterexample_violated_at_both_resolutions(config_path):
    service = _service(config_path, "counterexample2")
    pair = service.build_pair()
    report = check_condition_two_resolutions(pair.payoff, service.Q, pair.target, Monitoring.AWARE, [0.5, 0.25])
    assert report.agree
    assert not report.satisfied
    assert [single.n_families for single in report.reports] == [9, 25]
    for single in report.reports:
        assert single.inner_distance == pytest.approx(0.5 * np.sqrt(0.5), abs=1e-3)
    worst = report.reports[0].worst_family
    # Nature opposes the groups with two different Diracs
    assert sorted([worst.table[0, 0].tolist(), worst.table[0, 1].tolist()]) == [[0.0, 1.0], [1.0, 0.0]]
    assert report.to_dict()["satisfied"] is False


def test_grid_guard(config_path):
    service = _service(config_path, "counterexample2")
    pair = service.build_pair()
    with pytest.raises(GridSizeError) as info:
        check_condition_bruteforce(pair.payoff, service.Q, pair.target, Monitoring.AWARE, 0.01, guard=1000)
    assert info.value.estimate == 101 ** 2
