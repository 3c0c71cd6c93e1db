"""
Summary statistics across seeds and the frozen summary JSON layout.
"""

from typing import Dict, Iterable, List, Optional

import numpy as np


def describe(values: Iterable[Optional[float]]) -> Dict[str, Optional[float]]:
    """mean, standard error, min, max of the defined values"""
    defined = np.array([v for v in values if v is not None], dtype=float)
    if defined.size == 0:
        return {"mean": None, "stderr": None, "min": None, "max": None, "n": 0}
    stderr = float(defined.std(ddof=1) / np.sqrt(defined.size)) if defined.size > 1 else 0.0
    return {
        "mean": float(defined.mean()),
        "stderr": stderr,
        "min": float(defined.min()),
        "max": float(defined.max()),
        "n": int(defined.size),
    }


def final_values(series_by_seed: List[Dict[str, List[Optional[float]]]]) -> Dict[str, List[Optional[float]]]:
    """Last grid value of every metric column, one entry per seed"""
    columns = sorted({name for series in series_by_seed for name in series if name != "t"})
    return {name: [series[name][-1] if series.get(name) else None for series in series_by_seed]
            for name in columns}


def build_summary(instance: str, mode: str, horizon: int, seeds: List[int],
                  metrics: Dict[str, List[Optional[float]]], solver: Dict[str, int],
                  extra: Optional[Dict] = None) -> Dict:
    summary = {
        "instance": instance,
        "mode": mode,
        "horizon": horizon,
        "seeds": list(seeds),
        "metrics": {name: describe(values) for name, values in sorted(metrics.items())},
        "solver": {"lp_calls": int(solver.get("lp_calls", 0)),
                   "dykstra_sweeps": int(solver.get("dykstra_sweeps", 0))},
    }
    if extra:
        summary.update(extra)
    return summary
