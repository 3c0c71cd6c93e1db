"""
Zero-sum matrix games and weighted min-max problems solved as linear programs.
The row player minimizes, the column player maximizes.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from Common.constants import DUALITY_GAP_TOLERANCE, LP_CONDITION_FACTOR, SIMPLEX_PIVOT_TOLERANCE
from Common.errors import DimensionError, SolverError
from Services.Probability.finite_distributions import MixedAction
from Services.Solvers.simplex import solve_linear_program

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MatrixGame:
    payoff: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.payoff, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise DimensionError(f"MatrixGame needs a non-empty matrix, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise DimensionError("MatrixGame entries must be finite")
        matrix.flags.writeable = False
        object.__setattr__(self, "payoff", matrix)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.payoff.shape


@dataclass(frozen=True)
class GameSolution:
    value: float
    row_strategy: MixedAction
    col_strategy: MixedAction
    lower_value: float
    gap_tolerance: float = DUALITY_GAP_TOLERANCE

    @property
    def duality_gap(self) -> float:
        return self.value - self.lower_value


def _strategy(weights: np.ndarray) -> MixedAction:
    clipped = np.clip(weights, 0.0, None)
    total = float(clipped.sum())
    if total <= 0.0:
        raise SolverError("Linear program returned an empty strategy", weights)
    return MixedAction(clipped / total)


def _unit_range(matrix: np.ndarray) -> Tuple[np.ndarray, float]:
    """Entries mapped affinely onto [1, 2]; returns the map's scale (1 for constant matrices)"""
    low = float(matrix.min())
    spread = float(matrix.max()) - low
    scale = spread if spread > 0.0 else 1.0
    return (matrix - low) / scale + 1.0, scale


def _gap_tolerance(matrix: np.ndarray, scale: float, *conditions: float) -> float:
    """Duality-gap tolerance at the working precision of the LPs that produced the strategies"""
    precision = float(np.finfo(float).eps)
    condition = min(max(conditions), 1.0 / SIMPLEX_PIVOT_TOLERANCE)
    unit = max(DUALITY_GAP_TOLERANCE, LP_CONDITION_FACTOR * precision * condition)
    rounding = 4.0 * precision * sum(matrix.shape) * float(np.abs(matrix).max())
    return unit * scale + rounding


def solve_matrix_game(game: MatrixGame) -> GameSolution:
    """
    Solve min_p max_q p M q through the row and column linear programs.

    The LPs run on the matrix mapped onto [1, 2]; value and guarantees are
    evaluated on the original entries.

    Returns:
        GameSolution whose value is the guarantee of the row strategy

    Raises:
        SolverError: If the LPs fail or the duality gap exceeds tolerance
    """
    matrix = game.payoff
    n_rows, n_cols = matrix.shape
    if n_rows == 1 and n_cols == 1:
        value = float(matrix[0, 0])
        return GameSolution(value, MixedAction.dirac(1, 0), MixedAction.dirac(1, 0), value)

    unit, scale = _unit_range(matrix)

    # row LP: min v  s.t.  unit^T p <= v, sum p = 1
    c_row = np.zeros(n_rows + 1)
    c_row[-1] = 1.0
    A_row = np.hstack([unit.T, -np.ones((n_cols, 1))])
    eq_row = np.append(np.ones(n_rows), 0.0)[None, :]
    row_lp = solve_linear_program(c_row, A_row, np.zeros(n_cols), eq_row, np.ones(1))

    # column LP: max w  s.t.  unit q >= w, sum q = 1
    c_col = np.zeros(n_cols + 1)
    c_col[-1] = -1.0
    A_col = np.hstack([-unit, np.ones((n_rows, 1))])
    eq_col = np.append(np.ones(n_cols), 0.0)[None, :]
    col_lp = solve_linear_program(c_col, A_col, np.zeros(n_rows), eq_col, np.ones(1))

    row_strategy = _strategy(row_lp.x[:n_rows])
    col_strategy = _strategy(col_lp.x[:n_cols])
    value = float((row_strategy.weights @ matrix).max())
    lower_value = float((matrix @ col_strategy.weights).min())
    tolerance = _gap_tolerance(matrix, scale, row_lp.condition, col_lp.condition)
    if value - lower_value > tolerance:
        raise SolverError(f"Duality gap {value - lower_value:.3e} exceeds tolerance {tolerance:.3e}", matrix)
    return GameSolution(value, row_strategy, col_strategy, lower_value, tolerance)


def solve_weighted_minmax(blocks: Sequence[Tuple[float, np.ndarray]]) -> Tuple[MixedAction, float]:
    """
    Minimize sum_s w_s max_b (p M_s)_b over the simplex with one LP.

    Args:
        blocks: (weight_s >= 0, matrix M_s[a][b]) pairs sharing the row dimension

    Returns:
        (p, value); uniform p with value 0 when every weight is zero

    Raises:
        DimensionError: If blocks is empty or the matrices disagree on rows
    """
    if not blocks:
        raise DimensionError("solve_weighted_minmax needs at least one block")
    matrices = [np.asarray(matrix, dtype=float) for _, matrix in blocks]
    weights = np.array([float(weight) for weight, _ in blocks])
    n_rows = matrices[0].shape[0]
    if any(matrix.ndim != 2 or matrix.shape[0] != n_rows for matrix in matrices):
        raise DimensionError("All blocks must share the row dimension")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise DimensionError("Block weights must be finite and nonnegative")

    active = [i for i in range(len(blocks)) if weights[i] > 0]
    if not active:
        return MixedAction.uniform(n_rows), 0.0
    if n_rows == 1:
        p = MixedAction.dirac(1, 0)
        return p, float(sum(weights[i] * matrices[i].max() for i in active))

    # variables: p (n_rows), then one epigraph variable v_s per active block
    # one common scale and normalized weights leave the argmin unchanged
    n_blocks = len(active)
    spread = max(float(np.ptp(matrices[i])) for i in active)
    scale = spread if spread > 0.0 else 1.0
    c = np.concatenate([np.zeros(n_rows), weights[active] / weights[active].sum()])
    constraints = []
    for j, i in enumerate(active):
        shifted = (matrices[i] - matrices[i].min()) / scale + 1.0
        block = np.zeros((shifted.shape[1], n_rows + n_blocks))
        block[:, :n_rows] = shifted.T
        block[:, n_rows + j] = -1.0
        constraints.append(block)
    A_ub = np.vstack(constraints)
    A_eq = np.concatenate([np.ones(n_rows), np.zeros(n_blocks)])[None, :]
    lp = solve_linear_program(c, A_ub, np.zeros(A_ub.shape[0]), A_eq, np.ones(1))

    p = _strategy(lp.x[:n_rows])
    value = float(sum(weights[i] * (p.weights @ matrices[i]).max() for i in active))
    return p, value
