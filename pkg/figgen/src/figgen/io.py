"""Readers for the nlisim table formats.

CSV tables start with a ``# nlisim-table {...json...}`` comment line
carrying the schema version and run metadata, followed by a header row and
one record per grid point.  JSON tables hold the same rows under a
``rows`` key next to ``metadata`` and ``schema_version``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

CSV_MARKER = "# nlisim-table "

SUPPORTED_SCHEMA = "1"


@dataclass
class Table:
    columns: list[str]
    rows: list[dict]
    metadata: dict = field(default_factory=dict)
    schema_version: str = SUPPORTED_SCHEMA

    @property
    def command(self) -> str:
        return str(self.metadata.get("command", ""))

    def column(self, name: str) -> list:
        if name not in self.columns:
            raise ValueError(f"table has no column {name!r} (columns: {self.columns})")
        return [row.get(name) for row in self.rows]


def _coerce(value: str):
    if value == "":
        return None
    try:
        return float(value)
    except ValueError:
        return value


def _read_csv(path: str) -> Table:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith(CSV_MARKER):
            raise ValueError(f"{path}: not an nlisim table (missing '{CSV_MARKER.strip()}' line)")
        header = json.loads(first[len(CSV_MARKER):])
        reader = csv.reader(fh)
        try:
            columns = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: missing header row") from None
        rows = [{c: _coerce(v) for c, v in zip(columns, rec)} for rec in reader]
    return Table(
        columns=columns,
        rows=rows,
        metadata=header.get("metadata", {}),
        schema_version=str(header.get("schema_version", "")),
    )


def _read_json(path: str) -> Table:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    rows = payload.get("rows", [])
    return Table(
        columns=list(rows[0].keys()) if rows else [],
        rows=rows,
        metadata=payload.get("metadata", {}),
        schema_version=str(payload.get("schema_version", "")),
    )


def read_table(path: str) -> Table:
    """Read a CSV or JSON result table; the extension selects the parser."""
    table = _read_json(path) if path.endswith(".json") else _read_csv(path)
    if table.schema_version != SUPPORTED_SCHEMA:
        raise ValueError(
            f"{path}: unsupported schema version {table.schema_version!r} "
            f"(this reader understands {SUPPORTED_SCHEMA!r})"
        )
    return table
