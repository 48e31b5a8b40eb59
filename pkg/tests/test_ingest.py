import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monephase.errors import DataError
from monephase.ingest import (
    load_cpi,
    load_monetary,
    write_cpi,
    write_monetary,
)
from monephase.series import MonthIndex, MonthlySeries, Panel


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_minimal_monetary(tmp_path):
    path = write_lines(
        tmp_path / "m.csv",
        [
            "date,MB,BN,CO,RB,MB_SA",
            "1970-01,100,60,5,35,101",
            "1970-02,102,61,5,36,103",
        ],
    )
    panel = load_monetary(path)
    assert panel.start == MonthIndex(1970, 1)
    assert panel.length == 2
    assert panel["RB"].values.tolist() == [35.0, 36.0]


def test_month_gap_is_ordering_error(tmp_path):
    path = write_lines(
        tmp_path / "m.csv",
        [
            "date,MB,BN,CO,RB,MB_SA",
            "1970-01,1,1,1,1,1",
            "1970-03,1,1,1,1,1",
        ],
    )
    with pytest.raises(DataError, match="m.csv:3.*without gaps"):
        load_monetary(path)


def test_duplicate_month(tmp_path):
    path = write_lines(
        tmp_path / "m.csv",
        [
            "date,MB,BN,CO,RB,MB_SA",
            "1970-01,1,1,1,1,1",
            "1970-01,1,1,1,1,1",
        ],
    )
    with pytest.raises(DataError, match="duplicate month"):
        load_monetary(path)


def test_unparseable_cell_names_line_and_column(tmp_path):
    path = write_lines(
        tmp_path / "m.csv",
        [
            "date,MB,BN,CO,RB,MB_SA",
            "1970-01,1,1,1,oops,1",
        ],
    )
    with pytest.raises(DataError, match="m.csv:2: column RB"):
        load_monetary(path)


def test_wrong_header_rejected(tmp_path):
    path = write_lines(tmp_path / "m.csv", ["date,MB,RB", "1970-01,1,1"])
    with pytest.raises(DataError, match="header"):
        load_monetary(path)


def test_empty_cells_become_missing(tmp_path):
    path = write_lines(
        tmp_path / "m.csv",
        [
            "date,MB,BN,CO,RB,MB_SA",
            "1970-01,1,,1,1,1",
        ],
    )
    panel = load_monetary(path)
    assert np.isnan(panel["BN"].values[0])


def test_cpi_thirteen_months_feeds_yoy(tmp_path):
    lines = ["date,CPI,CPI_core"]
    month = MonthIndex(1970, 1)
    for i in range(13):
        lines.append(f"{month + i},{100 + i},{100 + i}")
    panel = load_cpi(write_lines(tmp_path / "c.csv", lines))
    from monephase.series import yoy

    out = yoy(panel["CPI"])
    assert out.values[12] == pytest.approx(12.0)


def test_cpi_nonpositive_rejected(tmp_path):
    path = write_lines(
        tmp_path / "c.csv",
        ["date,CPI,CPI_core", "1970-01,-1,100"],
    )
    with pytest.raises(DataError, match="positive"):
        load_cpi(path)


def test_cpi_2020_sanity_warning(tmp_path):
    lines = ["date,CPI,CPI_core"]
    month = MonthIndex(2020, 1)
    for i in range(12):
        lines.append(f"{month + i},250,250")
    with pytest.warns(UserWarning, match="2020 average"):
        load_cpi(write_lines(tmp_path / "c.csv", lines))


def test_cpi_2020_near_100_no_warning(tmp_path, recwarn):
    lines = ["date,CPI,CPI_core"]
    month = MonthIndex(2020, 1)
    for i in range(12):
        lines.append(f"{month + i},100.2,99.8")
    load_cpi(write_lines(tmp_path / "c.csv", lines))
    assert not [w for w in recwarn if "2020" in str(w.message)]


def test_crlf_accepted(tmp_path):
    path = tmp_path / "m.csv"
    path.write_bytes(b"date,MB,BN,CO,RB,MB_SA\r\n1970-01,1,1,1,1,1\r\n")
    panel = load_monetary(path)
    assert panel.length == 1


values_st = st.lists(
    st.one_of(st.none(), st.floats(-1e12, 1e12, allow_nan=False)),
    min_size=1,
    max_size=40,
)


@given(values_st, st.integers(1990, 2030), st.integers(1, 12))
@settings(max_examples=40, deadline=None)
def test_monetary_roundtrip_bit_exact(tmp_path_factory, values, year, month):
    start = MonthIndex(year, month)
    panel = Panel(
        start,
        len(values),
        {
            name: MonthlySeries(start, values)
            for name in ("MB", "BN", "CO", "RB", "MB_SA")
        },
    )
    path = tmp_path_factory.mktemp("rt") / "m.csv"
    write_monetary(path, panel)
    assert load_monetary(path) == panel


@given(st.lists(st.floats(0.01, 1e6, allow_nan=False), min_size=1, max_size=40))
@settings(max_examples=40, deadline=None)
def test_cpi_roundtrip_bit_exact(tmp_path_factory, values):
    # 1999 start keeps the sample clear of the 2020 base-year check
    start = MonthIndex(1999, 7)
    panel = Panel(
        start,
        len(values),
        {name: MonthlySeries(start, values) for name in ("CPI", "CPI_core")},
    )
    path = tmp_path_factory.mktemp("rt") / "c.csv"
    write_cpi(path, panel)
    assert load_cpi(path) == panel
