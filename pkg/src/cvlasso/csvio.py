"""Strict numeric CSV reading and round-trip-safe writing."""
import math
from pathlib import Path

import numpy as np


class CsvParseError(ValueError):
    def __init__(self, msg, line=None, column=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if column is not None:
            loc.append(f"column {column}")
        super().__init__(f"{', '.join(loc)}: {msg}" if loc else msg)
        self.line = line
        self.column = column


def _try_float(s):
    try:
        return float(s)
    except ValueError:
        return None


def parse_csv_matrix(text, source="<string>"):
    """Parse comma-separated numeric text into a 2-D float array.

    A first row in which no cell is numeric is treated as a header. Ragged
    rows, non-numeric cells and non-finite values are errors.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ValueError(f"{source}: empty file")
    rows = []
    width = None
    start = 0
    first = [c.strip() for c in lines[0].split(",")]
    if all(_try_float(c) is None for c in first):
        start = 1
        width = len(first)
    for lineno, line in enumerate(lines[start:], start=start + 1):
        cells = [c.strip() for c in line.split(",")]
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise CsvParseError(f"expected {width} fields, found {len(cells)}", line=lineno)
        row = []
        for col, c in enumerate(cells, start=1):
            v = _try_float(c)
            if v is None:
                raise CsvParseError(f"non-numeric cell {c!r}", line=lineno, column=col)
            if not math.isfinite(v):
                raise CsvParseError(f"non-finite value {c!r}", line=lineno, column=col)
            row.append(v)
        rows.append(row)
    if not rows:
        return np.zeros((0, width), dtype=np.float64)
    return np.array(rows, dtype=np.float64)


def load_csv_matrix(path):
    path = Path(path)
    return parse_csv_matrix(path.read_text(encoding="utf-8"), source=str(path))


def load_csv_vector(path):
    """A response file: one column, or a single row."""
    m = load_csv_matrix(path)
    if m.shape[1] == 1:
        return m[:, 0].copy()
    if m.shape[0] == 1:
        return m[0].copy()
    raise ValueError(f"{path}: response must be a single column, got shape {m.shape}")


def fmt(v):
    return format(float(v), ".17g")


def format_csv_matrix(a, header=None):
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    out = []
    if header is not None:
        out.append(",".join(header))
    out.extend(",".join(fmt(v) for v in row) for row in a)
    return "\n".join(out) + "\n"


def write_csv_matrix(path, a, header=None):
    Path(path).write_text(format_csv_matrix(a, header), encoding="utf-8")
