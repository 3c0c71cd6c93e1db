import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, Sequence, Union

PathLike = Union[str, Path]


def write_text_atomic(path: PathLike, text: str) -> Path:
    """Write to a sibling temp file, then rename over the target"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return path


def write_csv_atomic(path: PathLike, fieldnames: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(fieldnames), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in fieldnames})
    return write_text_atomic(path, buffer.getvalue())


def write_json_atomic(path: PathLike, payload: Any) -> Path:
    return write_text_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
