"""Flat-file plumbing: delimited tables and JSON documents.

Tables are plain comma-separated text with a single header line; numbers are
written with shortest round-trip decimals so re-reading a file reproduces the
floats bit-exactly.  Readers reject malformed input with the line and column
of the first offending field.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np


class ParseError(ValueError):
    """Malformed table or document, with position diagnostics."""


def _format_value(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_table(path: str | Path, header, rows) -> Path:
    """Write rows of numbers as CSV with a header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    width = len(header)
    for row in rows:
        row = tuple(row)
        if len(row) != width:
            raise ParseError(f"row has {len(row)} fields, header has {width}")
        lines.append(",".join(_format_value(x) for x in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_table(path: str | Path, expected_header=None):
    """Read a CSV table back as (header, float array)."""
    path = Path(path)
    text = path.read_text().splitlines()
    if not text:
        raise ParseError(f"{path}: empty file")
    header = text[0].split(",")
    if expected_header is not None and header != list(expected_header):
        raise ParseError(
            f"{path}:1: header {header!r}, expected {list(expected_header)!r}")
    rows = []
    for lineno, line in enumerate(text[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != len(header):
            raise ParseError(
                f"{path}:{lineno}: {len(fields)} fields, header has {len(header)}")
        parsed = []
        for col, field in enumerate(fields, start=1):
            try:
                parsed.append(float(field))
            except ValueError as exc:
                raise ParseError(
                    f"{path}:{lineno}:{col}: not a number: {field!r}") from exc
        rows.append(parsed)
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def write_ecdf(path: str | Path, values: np.ndarray) -> Path:
    """Write the empirical CDF of a sample as (value, cdf) rows."""
    v = np.sort(np.asarray(values, dtype=float))
    cdf = np.arange(1, v.size + 1) / v.size
    return write_table(path, ["value", "cdf"], zip(v, cdf))


def read_ecdf(path: str | Path) -> np.ndarray:
    """Read back an ecdf file and return the sample values in sorted order."""
    _, data = read_table(path, expected_header=["value", "cdf"])
    return data[:, 0]


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def read_json(path: str | Path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
