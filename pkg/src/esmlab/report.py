"""Table emission: CSV with a header row, or pretty JSON.

Every file starts with the version string and the resolved run config.  In
CSV these sit on ``#`` comment lines above the header row, so an empty table
is still a header-only CSV once comments are skipped.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

from . import __version__


def fmt(x):
    """Floats to 9 significant digits; everything else unchanged."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return None
        return float(f"{x:.9g}")
    if hasattr(x, "item") and not isinstance(x, (list, tuple, dict, str)):  # numpy scalars
        return fmt(x.item())
    if isinstance(x, dict):
        return {str(k): fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [fmt(v) for v in x]
    return x


def _cell(x):
    x = fmt(x)
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)  # list of dicts keyed by column

    def __eq__(self, other):
        return (isinstance(other, Table) and list(self.columns) == list(other.columns)
                and fmt(self.rows) == fmt(other.rows))


def render(payload, fmt_name: str, config: dict | None = None, notes: dict | None = None) -> str:
    """payload is a Table (csv or json) or a plain dict (json only)."""
    config = dict(config or {})
    if fmt_name == "json":
        body = {"version": __version__, "config": fmt(config)}
        if notes:
            body["notes"] = fmt(notes)
        if isinstance(payload, Table):
            body["columns"] = list(payload.columns)
            body["rows"] = fmt([{c: r.get(c) for c in payload.columns} for r in payload.rows])
        else:
            body["result"] = fmt(payload)
        return json.dumps(body, indent=2) + "\n"
    if fmt_name != "csv":
        raise ValueError(f"unknown format {fmt_name!r}")
    if not isinstance(payload, Table):
        raise ValueError("only tables can be written as CSV")
    buf = io.StringIO()
    buf.write(f"# version={__version__}\n")
    buf.write("# config=" + json.dumps(fmt(config), sort_keys=True) + "\n")
    if notes:
        buf.write("# notes=" + json.dumps(fmt(notes), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(payload.columns)
    for r in payload.rows:
        w.writerow([_cell(r.get(c)) for c in payload.columns])
    return buf.getvalue()


def emit(payload, fmt_name: str, path: str | None, config: dict | None = None,
         notes: dict | None = None) -> str:
    text = render(payload, fmt_name, config, notes)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def _parse_cell(s: str):
    if s == "":
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_table(text: str, fmt_name: str) -> tuple[Table, dict]:
    """Inverse of ``render`` for tables: returns (table, config)."""
    if fmt_name == "json":
        body = json.loads(text)
        return Table(body["columns"], body["rows"]), body["config"]
    lines = text.splitlines()
    config = {}
    data = []
    for ln in lines:
        if ln.startswith("# config="):
            config = json.loads(ln[len("# config="):])
        elif not ln.startswith("#"):
            data.append(ln)
    rows = list(csv.reader(data))
    if not rows:
        raise ValueError("no header row")
    cols = rows[0]
    return Table(cols, [{c: _parse_cell(v) for c, v in zip(cols, r)} for r in rows[1:]]), config
