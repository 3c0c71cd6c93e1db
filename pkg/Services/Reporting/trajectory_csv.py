"""
Trajectory CSV export and import: one row per sampled round, absent metrics blank.
"""

import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

from Common.constants import CSV_FLOAT_FORMAT, TRAJECTORY_COLUMNS
from Common.errors import SpecValidationError
from Services.Engine.trajectory import Trajectory
from utils.atomic_io import write_csv_atomic

logger = logging.getLogger(__name__)

Series = Dict[str, List[Optional[float]]]


def format_value(value: Optional[float]) -> str:
    if value is None:
        return ""
    return format(float(value), CSV_FLOAT_FORMAT)


def trajectory_rows(series: Series) -> List[Dict[str, str]]:
    rows = []
    for i, t in enumerate(series.get("t", [])):
        row = {"t": str(int(t))}
        for column in TRAJECTORY_COLUMNS[1:]:
            values = series.get(column)
            row[column] = format_value(values[i]) if values is not None else ""
        rows.append(row)
    return rows


def export_trajectory(traj: Trajectory, path: Union[str, Path]) -> Path:
    path = write_csv_atomic(path, TRAJECTORY_COLUMNS, trajectory_rows(traj.metric_series))
    logger.debug(f"Wrote {len(traj.metric_series.get('t', []))} rows to {path}")
    return path


def read_trajectory_csv(path: Union[str, Path], columns: Optional[Sequence[str]] = None) -> Series:
    """
    Read a trajectory CSV back into column series.

    Raises:
        SpecValidationError: Missing file, empty table or columns outside the trajectory schema
    """
    path = Path(path)
    if not path.is_file():
        raise SpecValidationError(f"CSV file not found: {path}")
    with path.open("r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        rows = list(reader)
    if not header or "t" not in header:
        raise SpecValidationError(f"{path} has no 't' column")
    unknown = [name for name in header if name not in TRAJECTORY_COLUMNS]
    if unknown:
        raise SpecValidationError(f"{path} has columns outside the trajectory schema: {unknown}")
    if not rows:
        raise SpecValidationError(f"{path} has no data rows")
    wanted = list(columns) if columns else [name for name in header if name != "t"]
    missing = [name for name in wanted if name not in header]
    if missing:
        raise SpecValidationError(f"{path} lacks the requested columns {missing}")

    series: Series = {"t": []}
    for name in wanted:
        series[name] = []
    try:
        for row in rows:
            series["t"].append(float(row["t"]))
            for name in wanted:
                series[name].append(float(row[name]) if row[name] not in ("", None) else None)
    except ValueError as e:
        raise SpecValidationError(f"{path} has a non-numeric entry: {str(e)}") from e
    return series
