"""
Per-thread solver counters (LP calls, Dykstra sweeps) reported in experiment summaries.
"""

import contextvars
from contextlib import contextmanager
from dataclasses import dataclass, asdict
from typing import Dict, Iterator


@dataclass
class SolverStatistics:
    lp_calls: int = 0
    dykstra_sweeps: int = 0

    def merge(self, other: "SolverStatistics") -> None:
        self.lp_calls += other.lp_calls
        self.dykstra_sweeps += other.dykstra_sweeps

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


_current: contextvars.ContextVar = contextvars.ContextVar("solver_statistics", default=None)


def record_lp_call() -> None:
    stats = _current.get()
    if stats is not None:
        stats.lp_calls += 1


def record_dykstra_sweeps(count: int) -> None:
    stats = _current.get()
    if stats is not None:
        stats.dykstra_sweeps += count


def absorb_statistics(other: SolverStatistics) -> None:
    """Add counters collected in a worker thread to this thread's collector"""
    stats = _current.get()
    if stats is not None and other is not None:
        stats.merge(other)


@contextmanager
def collecting_statistics() -> Iterator[SolverStatistics]:
    """Count solver work done in this thread while the block runs"""
    stats = SolverStatistics()
    token = _current.set(stats)
    try:
        yield stats
    finally:
        _current.reset(token)
