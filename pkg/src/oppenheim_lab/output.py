"""Experiment artifacts: CSV with '#' config echo lines, or JSON.

Floats are written with repr, so reading a file back gives the same bits.
Files are written to a temporary name and renamed into place.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]
    summary: dict = field(default_factory=dict)


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, int):
        return str(v)
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return json.dumps(v, separators=(",", ":"), sort_keys=True)


def _parse_cell(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    if s[:1] in "[{":
        try:
            return json.loads(s)
        except json.JSONDecodeError:
            pass
    return s


def render(config: dict, table: Table, fmt: str) -> bytes:
    if fmt == "json":
        doc = {"config": config, "columns": table.columns, "rows": table.rows, "summary": table.summary}
        return (json.dumps(doc, indent=1, sort_keys=True, allow_nan=True) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("# config: " + json.dumps(config, sort_keys=True, separators=(",", ":")) + "\n")
        buf.write("# summary: " + json.dumps(table.summary, sort_keys=True, separators=(",", ":")) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue().encode()
    raise ValueError(f"unknown format {fmt!r}")


def write_atomic(path: str | os.PathLike, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_output(path: str | os.PathLike) -> tuple[dict, Table]:
    """Parse an artifact back into (config, table)."""
    return parse_output(Path(path).read_text())


def parse_output(text: str) -> tuple[dict, Table]:
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return doc["config"], Table(doc["columns"], doc["rows"], doc.get("summary", {}))
    config, summary = {}, {}
    body = []
    for line in text.splitlines():
        if line.startswith("# config: "):
            config = json.loads(line[len("# config: ") :])
        elif line.startswith("# summary: "):
            summary = json.loads(line[len("# summary: ") :])
        elif not line.startswith("#"):
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    rows = [[_parse_cell(c) for c in r] for r in reader]
    return config, Table(columns, rows, summary)
