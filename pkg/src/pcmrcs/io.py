"""Deterministic CSV and manifest writers."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    x = float(v)
    if x == 0.0:
        return "0"  # no "-0"
    return f"{x:.9g}"


def write_csv(path, header, rows) -> Path:
    """Comma-separated, header row, 9 significant digits, LF line endings."""
    path = Path(path)
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """(header, float rows) of a CSV written by :func:`write_csv`."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        rows = [[float(c) for c in ln.rstrip("\n").split(",")] for ln in fh if ln.strip()]
    return header, np.array(rows)


def write_json(path, doc) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
