"""Figure-ready result tables and their CSV/JSON serialization.

CSV layout: one leading comment line ``# nlisim-table {...json...}``
carrying the schema version and run metadata, then a header row, then one
record per grid point with '.' decimal separator and 17 significant
digits.  JSON mirrors the CSV rows under a "rows" key next to a
"metadata" object.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

SCHEMA_VERSION = "1"

_CSV_MARKER = "# nlisim-table "


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[dict]
    metadata: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def sort_rows(self):
        """Deterministic row order by the (n_mean, tau, phi) triple."""
        def key(row):
            return tuple(float(row.get(k, 0.0) or 0.0) for k in ("n_mean", "tau", "phi", "nu"))
        self.rows.sort(key=key)


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    if value is None:
        return ""
    return str(value)


def to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    header = {"schema_version": table.schema_version, "metadata": table.metadata}
    buf.write(_CSV_MARKER + json.dumps(header, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_format_cell(row.get(c)) for c in table.columns])
    return buf.getvalue()


def to_json(table: ResultTable) -> str:
    payload = {
        "schema_version": table.schema_version,
        "metadata": table.metadata,
        "rows": [{c: row.get(c) for c in table.columns} for row in table.rows],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_table(table: ResultTable, path: str, fmt: str):
    text = to_csv(table) if fmt == "csv" else to_json(table)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _coerce(value: str):
    if value == "":
        return None
    try:
        f = float(value)
    except ValueError:
        return value
    return f


def read_csv(path: str) -> ResultTable:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith(_CSV_MARKER):
            raise ValueError(f"{path}: not an nlisim CSV table (missing metadata comment line)")
        header = json.loads(first[len(_CSV_MARKER):])
        reader = csv.reader(fh)
        try:
            columns = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: missing header row") from None
        rows = [{c: _coerce(v) for c, v in zip(columns, rec)} for rec in reader]
    return ResultTable(
        columns=columns,
        rows=rows,
        metadata=header.get("metadata", {}),
        schema_version=str(header.get("schema_version", "")),
    )


def read_json(path: str) -> ResultTable:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    rows = payload.get("rows", [])
    columns = list(rows[0].keys()) if rows else []
    return ResultTable(
        columns=columns,
        rows=rows,
        metadata=payload.get("metadata", {}),
        schema_version=str(payload.get("schema_version", "")),
    )


def read_table(path: str) -> ResultTable:
    if path.endswith(".json"):
        return read_json(path)
    return read_csv(path)
