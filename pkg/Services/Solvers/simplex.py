"""
Dense two-phase simplex method with Bland's rule.

Solves min c.x subject to A_ub x <= b_ub, A_eq x = b_eq, x >= 0 for the tiny
programs produced by the game solvers. The final basic solution is recomputed
from the original data so that tableau round-off does not leak into x.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from Common.constants import (
    SIMPLEX_FEASIBILITY_TOLERANCE, SIMPLEX_MAX_ITERATIONS, SIMPLEX_OPTIMALITY_TOLERANCE, SIMPLEX_PIVOT_TOLERANCE,
    TIE_TOLERANCE
)
from Common.errors import SolverError
from Services.Solvers.solver_stats import record_lp_call

logger = logging.getLogger(__name__)


@dataclass
class LinearProgramResult:
    x: np.ndarray
    objective: float
    iterations: int
    # condition number of the final basis; 1.0 when there are no constraints
    condition: float = 1.0


def _pivot(tableau: np.ndarray, basis: List[int], row: int, col: int) -> None:
    tableau[row] /= tableau[row, col]
    for r in range(tableau.shape[0]):
        if r != row and tableau[r, col] != 0.0:
            tableau[r] -= tableau[r, col] * tableau[row]
    basis[row] = col


def _price_out(tableau: np.ndarray, basis: List[int], costs: np.ndarray) -> None:
    """Write reduced costs for the current basis into the objective row"""
    tableau[-1, :] = 0.0
    tableau[-1, :costs.shape[0]] = costs
    for row, var in enumerate(basis):
        if costs[var] != 0.0:
            tableau[-1] -= costs[var] * tableau[row]


def _entering_column(tableau: np.ndarray, allowed: np.ndarray) -> Optional[int]:
    """
    Smallest-index improving column that has a usable pivot.

    Columns whose entries all sit below the pivot tolerance are numerically
    flat and skipped; a column with no positive entry at all proves the
    program unbounded.
    """
    n_rows = tableau.shape[0] - 1
    reduced = tableau[-1, :-1]
    for candidate in np.flatnonzero(allowed & (reduced < -SIMPLEX_OPTIMALITY_TOLERANCE)):
        column = tableau[:n_rows, candidate]
        if (column > SIMPLEX_PIVOT_TOLERANCE).any():
            return int(candidate)
        if not (column > 0.0).any() and reduced[candidate] < -SIMPLEX_FEASIBILITY_TOLERANCE:
            raise SolverError("Linear program is unbounded", tableau)
    return None


def _iterate(tableau: np.ndarray, basis: List[int], allowed: np.ndarray, max_iter: int) -> int:
    n_rows = tableau.shape[0] - 1
    for iteration in range(max_iter):
        entering = _entering_column(tableau, allowed)
        if entering is None:
            return iteration
        column = tableau[:n_rows, entering]
        positive = column > SIMPLEX_PIVOT_TOLERANCE
        ratios = np.full(n_rows, np.inf)
        ratios[positive] = tableau[:n_rows, -1][positive] / column[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + TIE_TOLERANCE)
        leaving = int(min(ties, key=lambda r: basis[r]))
        _pivot(tableau, basis, leaving, entering)
    raise SolverError(f"Simplex did not terminate within {max_iter} pivots", tableau)


def _refactor(standard: np.ndarray, rhs: np.ndarray, rows: List[int],
              basis: List[int]) -> Tuple[Optional[np.ndarray], float]:
    """Basic variable values solved directly from the original rows, with the basis condition number"""
    if not basis:
        return np.zeros(0), 1.0
    basis_matrix = standard[np.ix_(rows, basis)]
    try:
        values = np.linalg.solve(basis_matrix, rhs[rows])
    except np.linalg.LinAlgError:
        return None, float("inf")
    return values, float(np.linalg.cond(basis_matrix))


def solve_linear_program(c: np.ndarray, A_ub: Optional[np.ndarray] = None, b_ub: Optional[np.ndarray] = None,
                         A_eq: Optional[np.ndarray] = None, b_eq: Optional[np.ndarray] = None,
                         max_iter: int = SIMPLEX_MAX_ITERATIONS) -> LinearProgramResult:
    """
    Minimize c.x over the polyhedron with x >= 0.

    Raises:
        SolverError: If the program is infeasible, unbounded or cycles past max_iter
    """
    record_lp_call()
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # columns: original | slacks | artificials | rhs
    n_total = n + m_ub + m
    tableau = np.zeros((m + 1, n_total + 1))
    tableau[:m_ub, :n] = A_ub
    tableau[:m_ub, n:n + m_ub] = np.eye(m_ub)
    tableau[:m_ub, -1] = b_ub
    tableau[m_ub:m, :n] = A_eq
    tableau[m_ub:m, -1] = b_eq
    negative = tableau[:m, -1] < 0
    tableau[:m][negative] *= -1.0
    tableau[:m, n + m_ub:n + m_ub + m] = np.eye(m)
    standard, rhs = tableau[:m, :-1].copy(), tableau[:m, -1].copy()
    basis = list(range(n + m_ub, n_total))
    rows = list(range(m))

    artificial = np.zeros(n_total, dtype=bool)
    artificial[n + m_ub:] = True
    phase_one_costs = artificial.astype(float)
    _price_out(tableau, basis, phase_one_costs)
    iterations = _iterate(tableau, basis, np.ones(n_total, dtype=bool), max_iter)
    if -tableau[-1, -1] > SIMPLEX_FEASIBILITY_TOLERANCE:
        raise SolverError("Linear program is infeasible", tableau[:m])

    # drive zero-level artificials out of the basis; drop redundant rows
    row = 0
    while row < len(basis):
        if artificial[basis[row]]:
            candidates = np.flatnonzero(~artificial & (np.abs(tableau[row, :-1]) > SIMPLEX_PIVOT_TOLERANCE))
            if candidates.size:
                _pivot(tableau, basis, row, int(candidates[0]))
            else:
                tableau = np.delete(tableau, row, axis=0)
                del basis[row]
                del rows[row]
                continue
        row += 1

    costs = np.zeros(n_total)
    costs[:n] = c
    _price_out(tableau, basis, costs)
    iterations += _iterate(tableau, basis, ~artificial, max_iter)

    values, condition = _refactor(standard, rhs, rows, basis)
    if values is None:
        logger.debug("Final basis is singular; keeping the tableau solution")
        values = tableau[:len(basis), -1]
    solution = np.zeros(n_total)
    solution[basis] = np.maximum(values, 0.0)
    x = solution[:n]
    return LinearProgramResult(x=x, objective=float(c @ x), iterations=iterations, condition=condition)
