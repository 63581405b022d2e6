"""CSV and report I/O shared by the library and the CLI.

Data files are comma-separated with optional metadata header lines that
begin with '#' and contain 'key = value'. All floats are written with a
fixed format so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import numpy as np

FLOAT_FMT = "{:.12e}"


class DataFormatError(ValueError):
    """Raised for malformed CSV input; message carries the line number."""


def format_float(x):
    return FLOAT_FMT.format(float(x))


def write_table(path, columns, names, meta=None):
    """Write named columns to CSV with '# key = value' metadata lines."""
    columns = [np.asarray(c) for c in columns]
    lines = []
    for key, value in (meta or {}).items():
        lines.append(f"# {key} = {value}")
    lines.append(",".join(names))
    for row in zip(*columns):
        lines.append(",".join(format_float(v) for v in row))
    text = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    return text


def read_table(path):
    """Read a CSV written by write_table: (columns dict, metadata dict)."""
    meta = {}
    names = None
    rows = []
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            if names is None:
                names = [c.strip() for c in line.split(",")]
                continue
            parts = line.split(",")
            if len(parts) != len(names):
                raise DataFormatError(
                    f"{path}: line {lineno}: expected {len(names)} fields, got {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: non-numeric field") from exc
    if names is None:
        raise DataFormatError(f"{path}: no header row found")
    data = np.asarray(rows, dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(names))
    return {name: data[:, k] for k, name in enumerate(names)}, meta


def write_report(path, title, sections):
    """Write a fit/run report: a title plus (section, {key: value}) pairs.

    Values are written as plain 'key = value' lines so reports are easy to
    parse mechanically; floats use the fixed format.
    """
    lines = [title]
    for section, entries in sections:
        lines.append("")
        lines.append(f"[{section}]")
        for key, value in entries.items():
            if isinstance(value, float):
                value = format_float(value)
            lines.append(f"{key} = {value}")
    text = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    return text
