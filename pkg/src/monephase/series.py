"""Month-indexed series arithmetic and panel merging.

All analysis in this package runs on monthly data aligned at month end, so
a calendar month is the atomic time unit: ``MonthIndex`` is an ordered
(year, month) pair, ``MonthlySeries`` is a contiguous run of monthly
values with explicit missing entries, and ``Panel`` bundles several
series re-based to one common range.

Missing values are first-class and propagate through every transform;
nothing is imputed. Year-over-year transforms therefore come out missing
for their first twelve months, which is exactly the cut applied to the
merged sample downstream.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


@dataclass(frozen=True, order=False)
class MonthIndex:
    """A calendar month; ordering and month arithmetic are exact integers."""

    year: int
    month: int

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise DataError(f"month must be in 1..12, got {self.month}")

    @property
    def ordinal(self) -> int:
        return self.year * 12 + (self.month - 1)

    @classmethod
    def from_ordinal(cls, ordinal: int) -> "MonthIndex":
        year, month0 = divmod(ordinal, 12)
        return cls(year, month0 + 1)

    @classmethod
    def parse(cls, text: str) -> "MonthIndex":
        m = _MONTH_RE.match(text.strip())
        if m is None:
            raise DataError(f"cannot parse month {text!r}, expected YYYY-MM")
        return cls(int(m.group(1)), int(m.group(2)))

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"

    def __add__(self, months: int) -> "MonthIndex":
        return MonthIndex.from_ordinal(self.ordinal + int(months))

    def __sub__(self, other):
        if isinstance(other, MonthIndex):
            return self.ordinal - other.ordinal
        return MonthIndex.from_ordinal(self.ordinal - int(other))

    def __lt__(self, other: "MonthIndex") -> bool:
        return self.ordinal < other.ordinal

    def __le__(self, other: "MonthIndex") -> bool:
        return self.ordinal <= other.ordinal

    def __gt__(self, other: "MonthIndex") -> bool:
        return self.ordinal > other.ordinal

    def __ge__(self, other: "MonthIndex") -> bool:
        return self.ordinal >= other.ordinal


def month_range(start: MonthIndex, length: int) -> list[MonthIndex]:
    return [start + i for i in range(length)]


class MonthlySeries:
    """Contiguous monthly coverage from ``start``; NaN marks a missing month.

    Instances are immutable; the backing array is read-only. Present values
    must be finite, which keeps infinities out of every downstream
    computation.
    """

    __slots__ = ("start", "_values")

    def __init__(self, start: MonthIndex, values: Sequence[float | None]):
        arr = np.array(
            [np.nan if v is None else float(v) for v in values], dtype=np.float64
        )
        if arr.ndim != 1 or arr.size < 1:
            raise DataError("series needs at least one month of coverage")
        finite_or_nan = np.isfinite(arr) | np.isnan(arr)
        if not finite_or_nan.all():
            bad = int(np.argmin(finite_or_nan))
            raise DataError(f"non-finite value at {start + bad}")
        arr.flags.writeable = False
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "_values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("MonthlySeries is immutable")

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def end(self) -> MonthIndex:
        """Last covered month (inclusive)."""
        return self.start + (len(self) - 1)

    def __len__(self) -> int:
        return self._values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, MonthlySeries):
            return NotImplemented
        return self.start == other.start and np.array_equal(
            self._values, other._values, equal_nan=True
        )

    def __repr__(self) -> str:
        return f"MonthlySeries({self.start}..{self.end}, n={len(self)})"

    def position(self, month: MonthIndex) -> int:
        pos = month - self.start
        if not 0 <= pos < len(self):
            raise DataError(f"{month} outside coverage {self.start}..{self.end}")
        return pos

    def at(self, month: MonthIndex) -> float | None:
        v = self._values[self.position(month)]
        return None if np.isnan(v) else float(v)

    def defined_mask(self) -> np.ndarray:
        return ~np.isnan(self._values)

    def first_defined(self) -> MonthIndex:
        mask = self.defined_mask()
        if not mask.any():
            raise DataError("series has no defined values")
        return self.start + int(np.argmax(mask))

    def months(self) -> list[MonthIndex]:
        return month_range(self.start, len(self))

    def restrict(self, start: MonthIndex, end: MonthIndex) -> "MonthlySeries":
        """Slice to the inclusive month range [start, end]."""
        if start > end:
            raise DataError(f"empty range {start}..{end}")
        a, b = self.position(start), self.position(end)
        return MonthlySeries(start, self._values[a : b + 1])

    def with_values(self, values: np.ndarray) -> "MonthlySeries":
        if len(values) != len(self):
            raise DataError("replacement values must preserve length")
        return MonthlySeries(self.start, values)


@dataclass(frozen=True)
class Panel:
    """Named series sharing one month range; names keep insertion order."""

    start: MonthIndex
    length: int
    series: Mapping[str, MonthlySeries] = field(default_factory=dict)

    def __post_init__(self):
        names = list(self.series)
        if len(set(names)) != len(names):
            raise DataError("duplicate series names in panel")
        for name, s in self.series.items():
            if s.start != self.start or len(s) != self.length:
                raise DataError(
                    f"series {name!r} spans {s.start}..{s.end}, "
                    f"panel needs {self.start} with {self.length} months"
                )

    @property
    def end(self) -> MonthIndex:
        return self.start + (self.length - 1)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.series)

    def __getitem__(self, name: str) -> MonthlySeries:
        try:
            return self.series[name]
        except KeyError:
            raise DataError(f"panel has no series {name!r}") from None

    def __eq__(self, other) -> bool:
        if not isinstance(other, Panel):
            return NotImplemented
        return (
            self.start == other.start
            and self.length == other.length
            and self.names == other.names
            and all(self.series[n] == other.series[n] for n in self.names)
        )

    def months(self) -> list[MonthIndex]:
        return month_range(self.start, self.length)

    def with_series(self, name: str, s: MonthlySeries) -> "Panel":
        new = dict(self.series)
        new[name] = s.restrict(self.start, self.end)
        return Panel(self.start, self.length, new)


def yoy(series: MonthlySeries) -> MonthlySeries:
    """Year-over-year growth in percent: 100 * (x_t / x_{t-12} - 1).

    The first twelve months are missing by construction; so is any month
    where either operand is missing or the base value is zero.
    """
    if len(series) < 13:
        raise DataError(f"yoy needs at least 13 months, got {len(series)}")
    x = series.values
    out = np.full_like(x, np.nan)
    base = x[:-12]
    cur = x[12:]
    ok = ~np.isnan(base) & ~np.isnan(cur) & (base != 0.0)
    out12 = np.full(cur.shape, np.nan)
    out12[ok] = 100.0 * (cur[ok] / base[ok] - 1.0)
    out[12:] = out12
    return MonthlySeries(series.start, out)


def order_parameter(rb: MonthlySeries, mb: MonthlySeries) -> MonthlySeries:
    """Reserve share of the monetary base, phi_t = RB_t / MB_t."""
    if rb.start != mb.start or len(rb) != len(mb):
        raise DataError(
            f"order_parameter needs aligned series, got {rb.start}..{rb.end} "
            f"vs {mb.start}..{mb.end}"
        )
    r, m = rb.values, mb.values
    both = ~np.isnan(r) & ~np.isnan(m)
    bad_mb = both & (m <= 0.0)
    if bad_mb.any():
        month = rb.start + int(np.argmax(bad_mb))
        raise DataError(f"monetary base must be positive, offending month {month}")
    over = both & (r > m)
    if over.any():
        month = rb.start + int(np.argmax(over))
        raise DataError(
            f"reserve balances exceed monetary base at {month}; composition violated"
        )
    out = np.full_like(r, np.nan)
    out[both] = r[both] / m[both]
    return MonthlySeries(rb.start, out)


def index_to_base(series: MonthlySeries) -> MonthlySeries:
    """Scale so the first defined month equals 100 exactly."""
    mask = series.defined_mask()
    if not mask.any():
        raise DataError("cannot index an all-missing series")
    base = series.values[int(np.argmax(mask))]
    if base == 0.0:
        raise DataError("first defined value is zero; cannot index")
    return MonthlySeries(series.start, 100.0 * (series.values / base))


def merge(named: Mapping[str, MonthlySeries] | Iterable[tuple[str, MonthlySeries]]) -> Panel:
    """Restrict the given series to their common month range.

    Values inside the intersection are carried over bit-exactly.
    """
    items = list(named.items()) if isinstance(named, Mapping) else list(named)
    if not items:
        raise DataError("merge needs at least one series")
    start = max(s.start for _, s in items)
    end = min(s.end for _, s in items)
    if start > end:
        raise DataError("series have no overlapping months")
    length = end - start + 1
    return Panel(start, length, {name: s.restrict(start, end) for name, s in items})
