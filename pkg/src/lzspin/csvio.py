"""Deterministic CSV/JSON reading and writing.

Floats are serialized with ``repr`` (shortest round-tripping form), so a
written file read back yields bit-identical values and repeated runs with
the same inputs produce byte-identical artifacts.  All files use ``\\n``
line endings regardless of platform.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "write_csv",
    "read_csv_columns",
    "read_dataset_csv",
    "write_json",
    "read_json",
]

DATASET_HEADER = ("ramp_time_s", "contrast")


def write_csv(path, header: Sequence[str], columns: Sequence[np.ndarray]) -> None:
    """Write named float columns; all columns must share one length."""
    if len(header) != len(columns):
        raise ValueError(
            f"{len(header)} header fields but {len(columns)} columns"
        )
    cols = [np.asarray(c, dtype=float) for c in columns]
    n = len(cols[0])
    for name, c in zip(header, cols):
        if c.ndim != 1 or len(c) != n:
            raise ValueError(f"column {name!r} is not 1-D of length {n}")
    lines = [",".join(header)]
    for row in range(n):
        lines.append(",".join(repr(float(c[row])) for c in cols))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv_columns(path, expected_header: Sequence[str]) -> list[np.ndarray]:
    """Read a CSV written by :func:`write_csv`; malformed content raises
    ValueError naming the file and 1-based line number."""
    path = Path(path)
    text = path.read_text()
    lines = text.splitlines()
    if not lines:
        raise ValueError(f"{path}:1: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    if header != list(expected_header):
        raise ValueError(
            f"{path}:1: expected header {','.join(expected_header)!r}, "
            f"got {lines[0]!r}"
        )
    n_cols = len(header)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != n_cols:
            raise ValueError(
                f"{path}:{lineno}: expected {n_cols} fields, got {len(parts)}"
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}:2: no data rows")
    data = np.array(rows, dtype=float)
    return [data[:, k] for k in range(n_cols)]


def read_dataset_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """(ramp_times, contrast) from a two-column dataset file."""
    times, values = read_csv_columns(path, DATASET_HEADER)
    return times, values


def write_json(path, obj) -> None:
    """Sorted-key, indented JSON with a trailing newline."""
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
