"""CSV/manifest readers for qsbm run directories.

This package renders figures from the files a run emits (results.csv,
summary.csv, distributions.csv, manifest.json) and never recomputes any
physics; the run directories are its only interface to the simulator.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

SUPPORTED_SCHEMA = 1


class SchemaError(ValueError):
    """Input files missing, empty, or from an incompatible schema version."""


def check_manifest(run_dir: Path) -> dict:
    path = Path(run_dir) / "manifest.json"
    if not path.exists():
        raise SchemaError(f"{path}: missing manifest.json (not a qsbm run directory?)")
    manifest = json.loads(path.read_text())
    version = manifest.get("schema_version")
    if version != SUPPORTED_SCHEMA:
        raise SchemaError(f"{path}: schema_version {version!r}, "
                          f"this renderer supports {SUPPORTED_SCHEMA}")
    return manifest


def read_rows(run_dir: Path, name: str, required_columns: list[str]) -> list[dict]:
    path = Path(run_dir) / name
    if not path.exists():
        raise SchemaError(f"{path}: file not found")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        for column in required_columns:
            if column not in fields:
                raise SchemaError(f"{path}: missing required column {column!r}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def write_sidecar(path: Path, rows: list[dict]) -> None:
    """Exactly-plotted values, tidy long form; byte-stable across re-renders."""
    columns = ["figure", "panel", "series", "x", "y", "y_err"]
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(str(row.get(c, "")) for c in columns))
    Path(path).write_text("\n".join(lines) + "\n")
