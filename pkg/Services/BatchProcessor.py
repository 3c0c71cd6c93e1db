import time
import logging
from typing import Any, Callable, List, Optional, Sequence, Tuple
from dataclasses import dataclass
import concurrent.futures
from tqdm import tqdm

from Common.constants import MAX_WORKERS
from Services.Solvers.solver_stats import SolverStatistics, absorb_statistics, collecting_statistics

logger = logging.getLogger(__name__)

Job = Tuple[Any, Callable[[], Any]]


@dataclass
class SweepResult:
    key: Any
    index: int
    status: str
    payload: Any = None
    error: Optional[str] = None
    exception: Optional[BaseException] = None
    processing_time: Optional[float] = None
    statistics: Optional[SolverStatistics] = None


class BatchProcessor:
    """
    Runs independent jobs (seeds, tau values, grid chunks) on a thread pool.

    Results come back in submission order whatever the completion order, so
    every reduction over them is deterministic.
    """

    def __init__(self, max_workers: int = MAX_WORKERS, show_progress: bool = True,
                 description: str = "Processing"):
        self.max_workers = max(1, int(max_workers))
        self.show_progress = show_progress
        self.description = description

    def process(self, jobs: Sequence[Job], raise_on_error: bool = True) -> List[SweepResult]:
        """
        Execute every job and collect one SweepResult per job.

        Args:
            jobs: (key, zero-argument callable) pairs
            raise_on_error: Re-raise the first failure (in submission order) after all jobs finish

        Returns:
            Results ordered by submission index
        """
        results: List[Optional[SweepResult]] = [None] * len(jobs)
        progress = tqdm(total=len(jobs), desc=self.description, disable=not self.show_progress or len(jobs) < 2)

        if self.max_workers == 1 or len(jobs) < 2:
            for index, (key, job) in enumerate(jobs):
                results[index] = self._run_job(index, key, job)
                progress.update(1)
        else:
            with concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                future_to_index = {
                    executor.submit(self._run_job, index, key, job): index
                    for index, (key, job) in enumerate(jobs)
                }
                for future in concurrent.futures.as_completed(future_to_index):
                    results[future_to_index[future]] = future.result()
                    progress.update(1)
        progress.close()

        for result in results:
            self._handle_result(result)
        if raise_on_error:
            failed = next((result for result in results if result.status == "error"), None)
            if failed is not None:
                raise failed.exception
        return results

    def _run_job(self, index: int, key: Any, job: Callable[[], Any]) -> SweepResult:
        start_time = time.time()
        with collecting_statistics() as stats:
            try:
                payload = job()
                return SweepResult(key=key, index=index, status="success", payload=payload,
                                   processing_time=time.time() - start_time, statistics=stats)
            except Exception as e:
                logger.error(f"Error processing {key}: {str(e)}")
                return SweepResult(key=key, index=index, status="error", error=str(e), exception=e,
                                   processing_time=time.time() - start_time, statistics=stats)

    def _handle_result(self, result: SweepResult) -> None:
        absorb_statistics(result.statistics)
        if result.status == "success":
            logger.debug(f"Finished {result.key} in {result.processing_time:.2f}s")
