"""Deterministic CSV emission: fixed numeric format, atomic writes.

Numbers are printed with exactly ten significant digits, '.' decimal
separator, LF line endings.  Files are written to a temp path and renamed
into place so partial outputs never appear.
"""

from __future__ import annotations

import math
import os
from pathlib import Path

import numpy as np


def format_number(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return np.format_float_positional(x, precision=10, unique=False, fractional=False, trim="k")


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(format_number(cell) for cell in row) + "\n")
    os.replace(tmp, path)
    return path


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:] if line]
