"""
Error hierarchy shared by the simulator services.
Validation problems derive from ValueError, numerical failures from RuntimeError.
"""

from typing import Optional

import numpy as np


class ApproachabilityError(Exception):
    """Root of all simulator errors"""


class InvalidDistributionError(ApproachabilityError, ValueError):
    """Weights that do not form a probability vector"""


class DimensionError(ApproachabilityError, ValueError):
    """Shapes or dimensions that do not agree"""


class UnboundedSetError(ApproachabilityError, ValueError):
    """Operation needs a bounded set or an explicit bounding box"""


class DegenerateGroupError(ApproachabilityError, ValueError):
    """A sensitive group with zero probability where a conditional is needed"""


class UnsupportedCardinalityError(ApproachabilityError, ValueError):
    """Objective defined only for two sensitive groups"""


class GammaDependenceError(ApproachabilityError, ValueError):
    """A payoff embedding 1/gamma_s requested while Q is not known"""


class SpecValidationError(ApproachabilityError, ValueError):
    """Experiment spec that is not schema-valid or not self-consistent"""


class UndefinedMetricError(ApproachabilityError, ValueError):
    """Metric that cannot be evaluated on the given trajectory prefix"""

    def __init__(self, metric: str, reason: str):
        super().__init__(f"{metric} undefined: {reason}")
        self.metric = metric
        self.reason = reason


class SolverError(ApproachabilityError, RuntimeError):
    """Failure of an internal numerical solver"""

    def __init__(self, message: str, matrix: Optional[np.ndarray] = None):
        if matrix is not None:
            message = f"{message}\nmatrix dump:\n{np.array2string(np.asarray(matrix), precision=17)}"
        super().__init__(message)
        self.matrix = matrix


class ConvergenceError(SolverError):
    """Iterative projection that did not converge"""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class GridSizeError(ApproachabilityError, RuntimeError):
    """Brute-force grid larger than the configured guard"""

    def __init__(self, estimate: int, guard: int):
        super().__init__(f"Nature-family grid has {estimate} points, guard is {guard}")
        self.estimate = estimate
        self.guard = guard


class EngineError(ApproachabilityError, RuntimeError):
    """Failure inside a simulated round"""

    def __init__(self, round_index: int, state: dict, cause: Exception):
        super().__init__(f"Round {round_index} failed: {cause}; state: {state}")
        self.round_index = round_index
        self.state = state
        self.cause = cause
