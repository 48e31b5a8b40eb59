"""Deterministic CSV reading/writing helpers.

Floats are serialized with Python's shortest round-trip representation,
so write-then-read reproduces every value bit-exactly and repeated runs
produce byte-identical files. Missing values are empty cells.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError


def fmt(value) -> str:
    """One CSV cell: shortest round-trip float, plain int, str as-is."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int,)):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def parse_float_cell(cell: str) -> float:
    """Empty cell -> NaN; anything else must be a finite decimal real."""
    text = cell.strip()
    if text == "":
        return math.nan
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"cannot parse number {cell!r}") from None
    if not math.isfinite(v):
        raise DataError(f"non-finite number {cell!r}")
    return v


def write_csv(
    path: Path | str,
    header: Sequence[str],
    rows: Iterable[Sequence],
    preamble: Sequence[tuple[str, object]] = (),
) -> Path:
    """Write a comma-delimited UTF-8 file with optional '# key: value' preamble."""
    path = Path(path)
    lines = [f"# {key}: {fmt(value)}" for key, value in preamble]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path: Path | str) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Read back (preamble dict, header, raw string rows).

    Accepts LF or CRLF endings; raises on ragged rows with the line number.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8-sig")
    preamble: dict[str, str] = {}
    header: list[str] | None = None
    rows: list[list[str]] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if line == "" and header is not None:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, _, value = body.partition(":")
                preamble[key.strip()] = value.strip()
            continue
        cells = line.split(",")
        if header is None:
            header = cells
            continue
        if len(cells) != len(header):
            raise DataError(
                f"{path.name}:{lineno}: expected {len(header)} columns, got {len(cells)}"
            )
        rows.append(cells)
    if header is None:
        raise DataError(f"{path.name}: no header line found")
    return preamble, header, rows
