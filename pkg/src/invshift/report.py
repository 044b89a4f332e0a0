"""CSV and JSON writers shared by the CLI commands."""
from __future__ import annotations

import csv
import io
import json
import math
import sys

import numpy as np

SIG_DIGITS = 10


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.{SIG_DIGITS}g}"
    return str(value)


def _json_value(value):
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        # Keep JSON strict and mirror the CSV precision.
        return format_cell(v) if not math.isfinite(v) else float(format_cell(v))
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    return str(value)


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        cells = list(row) + [None] * (len(columns) - len(row))
        writer.writerow([format_cell(c) for c in cells])
    return buf.getvalue()


def render_json(columns, rows, meta=None) -> str:
    records = []
    for row in rows:
        cells = list(row) + [None] * (len(columns) - len(row))
        records.append({c: _json_value(v) for c, v in zip(columns, cells)})
    doc = {"columns": list(columns), "rows": records}
    if meta:
        doc["meta"] = _json_value(meta)
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def emit(text: str, path=None):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def render(columns, rows, fmt="csv", meta=None) -> str:
    if fmt == "csv":
        return render_csv(columns, rows)
    if fmt == "json":
        return render_json(columns, rows, meta)
    raise ValueError(f"unknown format {fmt!r}")
