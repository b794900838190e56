"""Reading and writing iteration traces (CSV and JSON)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, fields

from relaxo.solvers import IterationRecord

__all__ = ["TRACE_COLUMNS", "read_trace_csv", "read_trace_json", "trace_to_csv", "trace_to_json"]

TRACE_COLUMNS = tuple(f.name for f in fields(IterationRecord))
_INT_COLUMNS = {"k", "matvecs"}


def _fmt(name, value):
    return str(int(value)) if name in _INT_COLUMNS else "%.16e" % value


def trace_to_csv(trace, comment: str | None = None) -> str:
    """CSV text with one row per record; floats use ``%.16e`` (lossless)."""
    out = io.StringIO()
    if comment:
        out.write(f"# {comment}\n")
    out.write(",".join(TRACE_COLUMNS) + "\n")
    for rec in trace:
        out.write(",".join(_fmt(name, getattr(rec, name)) for name in TRACE_COLUMNS) + "\n")
    return out.getvalue()


def read_trace_csv(text: str) -> list[IterationRecord]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    records = []
    for row in csv.DictReader(lines):
        records.append(IterationRecord(**{
            name: int(row[name]) if name in _INT_COLUMNS else float(row[name])
            for name in TRACE_COLUMNS
        }))
    return records


def trace_to_json(trace, **meta) -> str:
    payload = dict(meta)
    payload["trace"] = [asdict(rec) for rec in trace]
    return json.dumps(payload, indent=1)


def read_trace_json(text: str) -> list[IterationRecord]:
    return [IterationRecord(**rec) for rec in json.loads(text)["trace"]]
