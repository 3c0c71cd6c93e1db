"""
Matrix games, weighted min-max blocks and the simplex LP, checked against
closed forms and scipy's linprog.
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from Common.errors import DimensionError, SolverError
from Services.Solvers.game_solver import MatrixGame, solve_matrix_game, solve_weighted_minmax
from Services.Solvers.simplex import solve_linear_program
from Services.Solvers.solver_stats import collecting_statistics

matrices = st.integers(1, 4).flatmap(
    lambda rows: st.integers(1, 4).flatmap(
        lambda cols: st.lists(st.floats(-5.0, 5.0), min_size=rows * cols, max_size=rows * cols).map(
            lambda values: np.array(values).reshape(rows, cols))))


def _scipy_value(matrix: np.ndarray) -> float:
    rows, cols = matrix.shape
    c = np.append(np.zeros(rows), 1.0)
    A_ub = np.hstack([matrix.T, -np.ones((cols, 1))])
    A_eq = np.append(np.ones(rows), 0.0)[None, :]
    bounds = [(0, None)] * rows + [(None, None)]
    return linprog(c, A_ub=A_ub, b_ub=np.zeros(cols), A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs").fun


def test_matching_pennies():
    solution = solve_matrix_game(MatrixGame([[1.0, -1.0], [-1.0, 1.0]]))
    assert solution.value == pytest.approx(0.0, abs=1e-9)
    assert solution.row_strategy.weights == pytest.approx([0.5, 0.5], abs=1e-9)
    assert solution.col_strategy.weights == pytest.approx([0.5, 0.5], abs=1e-9)


def test_mixed_equilibrium_example():
    solution = solve_matrix_game(MatrixGame([[3.0, 1.0], [0.0, 2.0]]))
    assert solution.value == pytest.approx(1.5, abs=1e-9)
    assert solution.row_strategy.weights == pytest.approx([0.5, 0.5], abs=1e-9)


def test_single_entry_game():
    solution = solve_matrix_game(MatrixGame([[7.0]]))
    assert solution.value == 7.0
    assert solution.row_strategy.is_dirac()
    assert solution.duality_gap == 0.0


def test_invalid_game_shapes():
    with pytest.raises(DimensionError):
        MatrixGame(np.zeros((0, 2)))
    with pytest.raises(DimensionError):
        MatrixGame([[1.0, np.nan]])


def _assert_gap_within_tolerance(solution):
    assert -solution.gap_tolerance <= solution.duality_gap <= solution.gap_tolerance


@settings(max_examples=100, deadline=None)
@given(matrices)
def test_value_matches_scipy(matrix):
    solution = solve_matrix_game(MatrixGame(matrix))
    _assert_gap_within_tolerance(solution)
    tolerance = 1e-7 * max(1.0, float(np.ptp(matrix))) + solution.gap_tolerance
    assert solution.value == pytest.approx(_scipy_value(matrix), abs=tolerance)


@settings(max_examples=50, deadline=None)
@given(matrices, st.floats(-10.0, 10.0))
def test_value_shift_and_permutation_invariance(matrix, shift):
    base = solve_matrix_game(MatrixGame(matrix))
    shifted = solve_matrix_game(MatrixGame(matrix + shift))
    tolerance = 1e-7 + base.gap_tolerance + shifted.gap_tolerance
    assert shifted.value == pytest.approx(base.value + shift, abs=tolerance)
    permuted = solve_matrix_game(MatrixGame(matrix[::-1, ::-1]))
    assert permuted.value == pytest.approx(base.value, abs=1e-7 + base.gap_tolerance + permuted.gap_tolerance)


near_degenerate = st.integers(1, 4).flatmap(
    lambda rows: st.integers(1, 4).flatmap(
        lambda cols: st.lists(st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0, 1e-10]),
                              min_size=rows * cols, max_size=rows * cols).map(
            lambda values: np.array(values).reshape(rows, cols))))


@settings(max_examples=200, deadline=None)
@given(near_degenerate)
def test_near_degenerate_entries_solve(matrix):
    solution = solve_matrix_game(MatrixGame(matrix))
    assert solution.row_strategy.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert solution.col_strategy.weights.sum() == pytest.approx(1.0, abs=1e-12)
    _assert_gap_within_tolerance(solution)
    assert solution.value == pytest.approx(_scipy_value(matrix), abs=1e-7 + solution.gap_tolerance)


def test_tiny_spread_game():
    solution = solve_matrix_game(MatrixGame([[0.0, 1e-10, 1e-10], [1e-10, 1e-10, 1e-10]]))
    assert solution.value == pytest.approx(1e-10, abs=1e-15)
    assert solution.lower_value == pytest.approx(1e-10, abs=1e-15)


def test_random_games_meet_the_duality_gap():
    rng = np.random.default_rng(7)
    for _ in range(200):
        rows, cols = rng.integers(1, 7, size=2)
        matrix = rng.uniform(-1.0, 1.0, size=(rows, cols))
        solution = solve_matrix_game(MatrixGame(matrix))
        assert abs(solution.duality_gap) <= 1e-9
        assert solution.value == pytest.approx(_scipy_value(matrix), abs=1e-7)


def test_weighted_minmax_examples():
    identity = np.eye(2)
    p, value = solve_weighted_minmax([(0.5, identity), (0.5, identity)])
    assert p.weights == pytest.approx([0.5, 0.5], abs=1e-9)
    assert value == pytest.approx(0.5, abs=1e-9)

    p, value = solve_weighted_minmax([(0.0, identity), (0.0, -identity)])
    assert p.weights.tolist() == [0.5, 0.5]
    assert value == 0.0


def test_weighted_minmax_single_block_is_matrix_game():
    matrix = np.array([[3.0, 1.0], [0.0, 2.0]])
    p, value = solve_weighted_minmax([(1.0, matrix)])
    assert value == pytest.approx(solve_matrix_game(MatrixGame(matrix)).value, abs=1e-9)


def test_weighted_minmax_rejects_bad_blocks():
    with pytest.raises(DimensionError):
        solve_weighted_minmax([])
    with pytest.raises(DimensionError):
        solve_weighted_minmax([(1.0, np.eye(2)), (1.0, np.eye(3))])
    with pytest.raises(DimensionError):
        solve_weighted_minmax([(-1.0, np.eye(2))])


def test_simplex_matches_linprog():
    c = np.array([-1.0, -2.0, 0.5])
    A_ub = np.array([[1.0, 1.0, 1.0], [1.0, 3.0, 0.0]])
    b_ub = np.array([4.0, 6.0])
    A_eq = np.array([[1.0, 0.0, 1.0]])
    b_eq = np.array([1.0])
    ours = solve_linear_program(c, A_ub, b_ub, A_eq, b_eq)
    reference = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, method="highs")
    assert ours.objective == pytest.approx(reference.fun, abs=1e-9)


def test_simplex_reports_infeasible_and_unbounded():
    with pytest.raises(SolverError):
        solve_linear_program(np.array([1.0]), A_eq=np.array([[1.0]]), b_eq=np.array([-1.0]))
    with pytest.raises(SolverError):
        solve_linear_program(np.array([-1.0]))


def test_lp_calls_are_counted():
    with collecting_statistics() as stats:
        solve_matrix_game(MatrixGame([[1.0, -1.0], [-1.0, 1.0]]))
    assert stats.lp_calls == 2
