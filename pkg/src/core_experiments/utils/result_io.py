"""CSV and JSON-lines writers for result rows.

Floats are written with `repr` so a CSV re-parses to identical rows; `None`
is an empty cell.
"""

import csv
import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any, TypeVar

from core_experiments.models.result_row import RowModel, SummaryRow

logger = logging.getLogger(__name__)

RowT = TypeVar("RowT", bound=RowModel)


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _ordered(rows: Iterable[RowT]) -> list[RowT]:
    return sorted(rows, key=lambda row: row.sort_key())


def write_rows(path: str | Path, rows: Sequence[RowModel], row_type: type[RowModel] | None = None) -> Path:
    """Write rows as CSV in canonical order with the row type's fixed header."""
    path = Path(path)
    header_type = row_type or (type(rows[0]) if rows else None)
    if header_type is None:
        raise ValueError("write_rows needs a row_type when rows is empty")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(header_type.csv_header)
        for row in _ordered(rows):
            writer.writerow([_format_cell(getattr(row, column)) for column in header_type.csv_header])
    logger.info("Wrote %d rows to %s", len(rows), path)
    return path


def read_rows(path: str | Path, row_type: type[RowT]) -> list[RowT]:
    """Parse a CSV written by `write_rows` back into rows."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as csv_file:
        reader = csv.DictReader(csv_file)
        if tuple(reader.fieldnames or ()) != row_type.csv_header:
            raise ValueError(f"'{path}' does not carry the {row_type.__name__} header")
        return [
            row_type.model_validate({key: (None if value == "" else value) for key, value in record.items()})
            for record in reader
        ]


def write_jsonl(path: str | Path, records: Iterable[RowModel | Mapping[str, Any]]) -> Path:
    """One JSON object per line; rows keep canonical order."""
    path = Path(path)
    items = list(records)
    if items and all(isinstance(item, RowModel) for item in items):
        items = _ordered(items)  # type: ignore[arg-type]
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as jsonl_file:
        for item in items:
            payload = item.model_dump() if isinstance(item, RowModel) else dict(item)
            jsonl_file.write(json.dumps(payload, sort_keys=False) + "\n")
    return path


def companion_path(csv_path: str | Path, suffix: str) -> Path:
    """`results.csv` -> `results<suffix>`, e.g. `.jsonl` or `.timings.jsonl`."""
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + suffix)


def write_summary(path: str | Path, rows: Sequence[SummaryRow]) -> Path:
    return write_rows(path, rows, row_type=SummaryRow)
