"""CSV emission with fixed column contracts."""

from __future__ import annotations

import dataclasses
import logging
import pathlib
from typing import Any, Iterable, Mapping, Sequence

import pandas as pd

from penalty_ns.hparams import CSV_COLUMNS, CSV_FLOAT_FORMAT

logger = logging.getLogger(__name__)

MANIFEST_PREFIX = "# manifest "


class OutputError(OSError):
    """Reading or writing an output file failed."""


def _as_row(record: Any) -> Mapping[str, Any]:
    if hasattr(record, "as_row"):
        return record.as_row()
    if isinstance(record, Mapping):
        return record
    if dataclasses.is_dataclass(record) and not isinstance(record, type):
        return dataclasses.asdict(record)
    raise TypeError(f"Cannot convert {type(record).__name__} to a CSV row!")


def write_csv(
    records: Iterable[Any],
    path: str | pathlib.Path,
    kind: str | None = None,
    columns: Sequence[str] | None = None,
    manifest_hash: str | None = None,
) -> None:
    """Write homogeneous records as CSV in the given order.

    Args:
        records: Dicts, dataclasses, or objects with as_row().
        path: Output file.
        kind: Name of a column contract in CSV_COLUMNS.
        columns: Explicit columns; used when kind is None.
        manifest_hash: If given, a "# manifest <hash>" line is written first.

    Raises:
        OutputError: The file could not be written.
    """
    if kind is not None:
        columns = CSV_COLUMNS[kind]
    if columns is None:
        raise ValueError("Either kind or columns must be given!")
    rows = [_as_row(record) for record in records]
    for i, row in enumerate(rows):
        missing = set(columns) - set(row)
        if missing:
            raise ValueError(
                f"Record {i} is missing columns {sorted(missing)}!"
            )
    data = pd.DataFrame(
        [[row[c] for c in columns] for row in rows], columns=list(columns)
    )
    path = pathlib.Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as file:
            if manifest_hash is not None:
                file.write(f"{MANIFEST_PREFIX}{manifest_hash}\n")
            data.to_csv(
                file,
                index=False,
                float_format=CSV_FLOAT_FORMAT,
                lineterminator="\n",
            )
    except OSError as err:
        raise OutputError(f"Failed to write {path}: {err}") from err
    logger.debug("Wrote %d rows to %s.", len(rows), path)


def read_csv(path: str | pathlib.Path) -> pd.DataFrame:
    """Read a CSV written by write_csv; floats are parsed round-trip exact."""
    path = pathlib.Path(path)
    try:
        return pd.read_csv(path, comment="#", float_precision="round_trip")
    except OSError as err:
        raise OutputError(f"Failed to read {path}: {err}") from err


def read_manifest_hash(path: str | pathlib.Path) -> str | None:
    """Manifest hash from the first line of a CSV, if present."""
    path = pathlib.Path(path)
    try:
        with path.open("r", encoding="utf-8") as file:
            first = file.readline().rstrip("\n")
    except OSError as err:
        raise OutputError(f"Failed to read {path}: {err}") from err
    if first.startswith(MANIFEST_PREFIX):
        return first[len(MANIFEST_PREFIX) :]
    return None
