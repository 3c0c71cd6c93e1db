"""
Tradeoff budgets of the calibration/parity frontier and its analytic bands.

The Pareto sweep in ExperimentService, the plug-in hat sets and the tilde
tradeoff objective all read their (epsilon, delta) from here.
"""

from typing import Tuple

from Common.errors import DimensionError
from Services.Strategies.monitoring import Monitoring


def tradeoff_budgets(tv_value: float, tau: float, monitoring: Monitoring = Monitoring.UNAWARE,
                     calibration_slack: float = 0.0) -> Tuple[float, float]:
    """
    Map tau to the (epsilon, delta) budgets of the calibration/parity tradeoff.

    delta = tau * TV; epsilon = 1 - tau * TV under aware monitoring and
    (1 - tau) * TV under unaware monitoring, plus the calibration slack.
    """
    if not 0.0 <= tau <= 1.0:
        raise DimensionError(f"tau must lie in [0, 1], got {tau}")
    if Monitoring(monitoring) is Monitoring.AWARE:
        epsilon = 1.0 - tau * tv_value
    else:
        epsilon = (1.0 - tau) * tv_value
    return epsilon + calibration_slack, tau * tv_value


def frontier_bands(tv_value: float, tau: float, N: int, monitoring: Monitoring) -> Tuple[float, float]:
    """Analytic lower/upper band of the group-calibration error at budget tau * TV"""
    epsilon, _ = tradeoff_budgets(tv_value, tau, monitoring)
    return epsilon, epsilon + 1.0 / N
