import traceback
from pathlib import Path
from typing import Callable, List, Optional, Sequence

from Common.constants import (
    ASSUMPTION1_DEFAULT_REPS, EXIT_GRID_GUARD, EXIT_OK, EXIT_SOLVER_FAILURE,
    EXIT_VALIDATION_ERROR, MAX_WORKERS
)
from Common.errors import EngineError, GridSizeError, SolverError
from Common.experiment_spec import load_spec
from Logging_file.logging_file import custom_logger
from Services.ExperimentService import ExperimentService
from Services.Reporting.svg_chart import aggregate_runs, line_chart_svg
from Services.Reporting.trajectory_csv import read_trajectory_csv
from utils.atomic_io import write_text_atomic


def exit_code_for(error: Exception) -> int:
    """Map a failure to the CLI exit code: 2 validation, 3 solver/runtime, 4 grid guard"""
    if isinstance(error, GridSizeError):
        return EXIT_GRID_GUARD
    if isinstance(error, (SolverError, EngineError)):
        return EXIT_SOLVER_FAILURE
    if isinstance(error, ValueError):
        return EXIT_VALIDATION_ERROR
    return EXIT_SOLVER_FAILURE


def _guarded(command: str, body: Callable[[], int]) -> int:
    try:
        return body()
    except GridSizeError as e:
        custom_logger.error(f"{command}: grid guard exceeded, estimated {e.estimate} Nature families "
                            f"(guard {e.guard}); use a coarser resolution")
        return exit_code_for(e)
    except (SolverError, EngineError) as e:
        custom_logger.error(f"{command}: solver failure: {str(e)}")
        return exit_code_for(e)
    except ValueError as e:
        custom_logger.error(f"{command}: invalid input: {str(e)}")
        return exit_code_for(e)
    except Exception as e:
        custom_logger.error(f"{command}: unexpected error: {str(e)}\n{traceback.format_exc()}")
        return exit_code_for(e)


def _service(spec_path: str, workers: int, out_dir: Optional[str], seed_override: Optional[int]) -> ExperimentService:
    spec = load_spec(spec_path)
    return ExperimentService(spec, workers=workers, out_dir=out_dir, seed_override=seed_override)


@custom_logger.log_around
def cmd_run(spec_path: str, seed_override: Optional[int] = None, workers: int = MAX_WORKERS,
            out_dir: Optional[str] = None) -> int:
    """Per-seed trajectory CSVs and summary.json"""
    def body() -> int:
        outcome = _service(spec_path, workers, out_dir, seed_override).run_experiment()
        for name, stats in outcome.summary["metrics"].items():
            if stats["mean"] is not None:
                custom_logger.info(f"{name}: mean {stats['mean']:.6g} (stderr {stats['stderr']:.3g})")
        custom_logger.info(f"Wrote {len(outcome.files)} files")
        return EXIT_OK
    return _guarded("run", body)


@custom_logger.log_around
def cmd_pareto(spec_path: str, seed_override: Optional[int] = None, workers: int = MAX_WORKERS,
               out_dir: Optional[str] = None) -> int:
    """frontier.csv, frontier.svg and summary.json"""
    def body() -> int:
        outcome = _service(spec_path, workers, out_dir, seed_override).pareto_experiment()
        for row in outcome.summary["frontier"]:
            custom_logger.info(f"tau={row['tau']:.3g}: GC {row['gc_mean']:.4f} "
                               f"in band [{row['band_lower']:.4f}, {row['band_upper']:.4f}], D {row['dp_mean']:.4f}")
        return EXIT_OK
    return _guarded("pareto", body)


@custom_logger.log_around
def cmd_check(spec_path: str, workers: int = MAX_WORKERS, out_dir: Optional[str] = None) -> int:
    """check_report.json with the verdict at every grid resolution"""
    def body() -> int:
        report = _service(spec_path, workers, out_dir, None).check_experiment()
        for single in report.reports:
            custom_logger.info(f"resolution {single.resolution:.4g}: "
                               f"{'satisfied' if single.satisfied else 'violated'} "
                               f"(inner distance {single.inner_distance:.6f})")
        if not report.agree:
            custom_logger.warning("Verdicts differ across resolutions")
        return EXIT_OK
    return _guarded("check", body)


@custom_logger.log_around
def cmd_plot(csv_paths: Sequence[str], out_svg: str, columns: Optional[List[str]] = None) -> int:
    """Log-x chart of the chosen columns; several CSVs are aggregated as mean line with min/max band"""
    def body() -> int:
        if not csv_paths:
            raise ValueError("No CSV files given")
        series_list = [read_trajectory_csv(path, columns) for path in csv_paths]
        chosen = columns or [name for name in series_list[0] if name != "t"]
        lines = [aggregate_runs(series_list, column) for column in chosen]
        title = Path(csv_paths[0]).stem if len(csv_paths) == 1 else f"{len(csv_paths)} runs"
        write_text_atomic(out_svg, line_chart_svg(lines, title=title, y_label=", ".join(chosen)))
        custom_logger.info(f"Wrote {out_svg}")
        return EXIT_OK
    return _guarded("plot", body)


@custom_logger.log_around
def cmd_diagnose(spec_path: str, reps: int = ASSUMPTION1_DEFAULT_REPS, workers: int = MAX_WORKERS,
                 out_dir: Optional[str] = None) -> int:
    """assumption1.csv, plus hat-set coverage for unknown-target specs"""
    def body() -> int:
        outcome = _service(spec_path, workers, out_dir, None).diagnose_experiment(reps)
        for row in outcome.summary["assumption1"]:
            custom_logger.info(f"t={row['t']}: t*E[TV^2] = {row['t_times_mean_tv2']:.4f}")
        return EXIT_OK
    return _guarded("diagnose", body)
