"""CSV and JSON report writers."""
import csv
import json
from pathlib import Path
from typing import Any, Iterable, Sequence, Union

PathLike = Union[str, Path]


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, bool):
        return int(value)
    return getattr(value, "value", value)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def write_json(path: PathLike, payload: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path
