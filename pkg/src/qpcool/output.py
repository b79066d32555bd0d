"""Deterministic CSV and manifest emission.

Every CSV starts with two comment lines (# schema_version and # source)
followed by a header row; floats are printed with %.17g so identical
inputs give byte-identical files.  A run manifest (JSON, sorted keys)
records every resolved physical parameter next to the data files.
"""

from __future__ import annotations

import json
from pathlib import Path

SCHEMA_VERSION = 1


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(path, columns, rows, source: str = "qpcool"):
    """Write rows (iterable of tuples) under a schema-versioned header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# schema_version: {SCHEMA_VERSION}", f"# source: {source}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_manifest(path, payload: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return path


def read_csv(path):
    """Read a schema-versioned CSV back into (meta, columns, rows-of-strings)."""
    meta = {}
    columns = None
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
            continue
        if columns is None:
            columns = line.split(",")
            continue
        rows.append(line.split(","))
    return meta, columns, rows
