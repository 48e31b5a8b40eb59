"""Canonical CSV ingest for the monetary and CPI input files.

The tool consumes two hand-converted CSVs rather than the source
spreadsheets: converting once by hand is less brittle than scraping a
workbook layout, and the expected headers below make the conversion
unambiguous. Monetary quantities are in 100 million yen; CPI columns are
2020=100 index numbers. Dates are YYYY-MM, ascending, gap-free.

Validation is total: a malformed input raises a DataError naming file,
line, and column, and no partial panel is returned.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .csvio import fmt, parse_float_cell, read_csv, write_csv
from .errors import DataError
from .series import MonthIndex, MonthlySeries, Panel

MONETARY_COLUMNS = ("date", "MB", "BN", "CO", "RB", "MB_SA")
CPI_COLUMNS = ("date", "CPI", "CPI_core")


@dataclass(frozen=True)
class DataManifest:
    """The two canonical input files plus their expected shapes and units."""

    monetary_path: Path
    cpi_path: Path
    monetary_columns: tuple[str, ...] = ("date", "MB", "BN", "CO", "RB", "MB_SA")
    cpi_columns: tuple[str, ...] = ("date", "CPI", "CPI_core")
    monetary_unit: str = "100 million yen"
    cpi_unit: str = "index, 2020 = 100"

    def load(self) -> tuple[Panel, Panel]:
        return load_monetary(self.monetary_path), load_cpi(self.cpi_path)


def _load_table(path: Path | str, columns: tuple[str, ...]) -> Panel:
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    _, header, rows = read_csv(path)
    if tuple(header) != columns:
        raise DataError(
            f"{path.name}: header must be {','.join(columns)!r}, got {','.join(header)!r}"
        )
    if not rows:
        raise DataError(f"{path.name}: no data rows")

    months: list[MonthIndex] = []
    data = {name: [] for name in columns[1:]}
    # line 1 is the header
    for i, cells in enumerate(rows):
        lineno = i + 2
        try:
            month = MonthIndex.parse(cells[0])
        except DataError as exc:
            raise DataError(f"{path.name}:{lineno}: column date: {exc}") from None
        if months:
            step = month - months[-1]
            if step == 0:
                raise DataError(f"{path.name}:{lineno}: duplicate month {month}")
            if step != 1:
                raise DataError(
                    f"{path.name}:{lineno}: months must ascend without gaps "
                    f"({months[-1]} -> {month})"
                )
        months.append(month)
        for name, cell in zip(columns[1:], cells[1:]):
            try:
                data[name].append(parse_float_cell(cell))
            except DataError as exc:
                raise DataError(f"{path.name}:{lineno}: column {name}: {exc}") from None

    start = months[0]
    series = {
        name: MonthlySeries(start, np.asarray(vals)) for name, vals in data.items()
    }
    return Panel(start, len(months), series)


def load_monetary(path: Path | str) -> Panel:
    """Read the monetary file (MB, BN, CO, RB, MB_SA; 100 million yen)."""
    return _load_table(path, MONETARY_COLUMNS)


def load_cpi(path: Path | str) -> Panel:
    """Read the CPI file (headline and core, 2020=100 index numbers).

    Index numbers must be positive. If the file covers any 2020 months
    whose headline average strays outside [95, 105], a warning is issued:
    the data are probably not on the 2020 base the pipeline assumes.
    """
    panel = _load_table(Path(path), CPI_COLUMNS)
    for name in ("CPI", "CPI_core"):
        vals = panel[name].values
        bad = ~np.isnan(vals) & (vals <= 0.0)
        if bad.any():
            month = panel.start + int(np.argmax(bad))
            raise DataError(
                f"{Path(path).name}: column {name}: index numbers must be positive, "
                f"offending month {month}"
            )
    y2020 = [
        panel["CPI"].values[i]
        for i, m in enumerate(panel.months())
        if m.year == 2020 and not np.isnan(panel["CPI"].values[i])
    ]
    if y2020:
        mean = float(np.mean(y2020))
        if not 95.0 <= mean <= 105.0:
            warnings.warn(
                f"{Path(path).name}: 2020 average of CPI is {mean:.2f}, expected "
                f"about 100 for a 2020-base index",
                stacklevel=2,
            )
    return panel


def _write_table(path: Path | str, panel: Panel, columns: tuple[str, ...]) -> Path:
    rows = []
    for i, month in enumerate(panel.months()):
        row = [str(month)]
        for name in columns[1:]:
            row.append(fmt(float(panel[name].values[i])))
        rows.append(row)
    return write_csv(path, columns, rows)


def write_monetary(path: Path | str, panel: Panel) -> Path:
    """Inverse of load_monetary; round-trips bit-exactly."""
    return _write_table(path, panel, MONETARY_COLUMNS)


def write_cpi(path: Path | str, panel: Panel) -> Path:
    """Inverse of load_cpi; round-trips bit-exactly."""
    return _write_table(path, panel, CPI_COLUMNS)
