"""Quote parsing, windowing, session filtering, and the JSONL format."""

import io
import json
from datetime import datetime
from zoneinfo import ZoneInfo

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volgram.errors import (AllWindowsFiltered, EmptyInput, MissingColumn,
                            TooManyMalformed)
from volgram.market_data import (QuoteRecord, build_windows, parse_quotes,
                                 read_windows_jsonl, window_from_dict,
                                 window_to_dict, write_windows_jsonl)

NY = ZoneInfo("America/New_York")


def _epoch(year, month, day, hour, minute, tz=NY):
    return datetime(year, month, day, hour, minute, tzinfo=tz).timestamp()


HEADER = "timestamp,symbol,last_price,volume\n"


def test_parse_single_row():
    csv = HEADER + "2011-03-16T09:40:00Z,IBM,100.0,5000\n"
    result = parse_quotes(csv.encode())
    assert result.n_malformed == 0
    (rec,) = result.records
    assert rec.symbol == "IBM"
    assert rec.last_price == 100.0
    assert rec.volume == 5000.0
    assert rec.timestamp == datetime(2011, 3, 16, 9, 40,
                                     tzinfo=ZoneInfo("UTC")).timestamp()


def test_parse_epoch_seconds():
    csv = HEADER + "1300000000,GE,17.5,120\n"
    (rec,) = parse_quotes(csv.encode()).records
    assert rec.timestamp == 1300000000.0


def test_parse_counts_negative_volume_as_malformed():
    csv = HEADER + "1300000000,GE,17.5,-3\n" + "1300000001,GE,17.5,10\n"
    result = parse_quotes(csv.encode())
    assert result.n_malformed == 1
    assert len(result.records) == 1


def test_parse_header_only():
    result = parse_quotes(HEADER.encode())
    assert result.records == []
    assert result.n_malformed == 0


def test_parse_missing_column():
    with pytest.raises(MissingColumn):
        parse_quotes(b"timestamp,symbol,last_price\n1,GE,2\n")


def test_parse_too_many_malformed():
    rows = "\n".join(["1300000000,GE,not_a_price,10"] * 3
                     + ["1300000000,GE,5.0,10"]) + "\n"
    with pytest.raises(TooManyMalformed):
        parse_quotes((HEADER + rows).encode())


def test_parse_column_mapping_ignores_extra_fields():
    csv = ("time,ticker,price,vol,day_high,moving_avg_200d\n"
           "1300000000,AA,3.0,7,9.9,2.2\n")
    result = parse_quotes(csv.encode(), column_map={
        "timestamp": "time", "symbol": "ticker",
        "last_price": "price", "volume": "vol"})
    (rec,) = result.records
    assert rec.last_price == 3.0
    assert rec.volume == 7.0


def test_parse_accepts_stream():
    result = parse_quotes(io.StringIO(HEADER + "1300000000,GE,1.0,1\n"))
    assert len(result.records) == 1


def _records_one_window(values, start=None):
    start = start or _epoch(2011, 3, 16, 10, 0)
    return [QuoteRecord(start + 30 * i, f"S{i}", price, volume)
            for i, (price, volume) in enumerate(values)]


def test_build_windows_normalization():
    # volume-prices 1, 2, 3 normalize to 0.5, 1.0, 1.5
    records = _records_one_window([(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)])
    built = build_windows(records, min_companies=3)
    (w,) = built.windows
    assert sorted(w.samples.tolist()) == pytest.approx([0.5, 1.0, 1.5])
    assert w.mean_s == pytest.approx(2.0)
    assert w.n_companies == 3


def test_build_windows_last_value_per_symbol():
    start = _epoch(2011, 3, 16, 10, 0)
    records = [QuoteRecord(start + 10, "A", 1.0, 10.0),
               QuoteRecord(start + 500, "A", 2.0, 10.0),
               QuoteRecord(start + 20, "B", 4.0, 10.0)]
    built = build_windows(records, min_companies=2)
    (w,) = built.windows
    assert w.mean_s == pytest.approx((20.0 + 40.0) / 2.0)


def test_build_windows_drops_zero_volume():
    records = _records_one_window([(1.0, 0.0), (2.0, 1.0), (3.0, 1.0)])
    built = build_windows(records, min_companies=2)
    (w,) = built.windows
    assert w.n_companies == 2
    assert built.n_zero_volume_dropped == 1


def test_after_hours_record_contributes_to_no_window():
    late = QuoteRecord(_epoch(2011, 3, 16, 16, 5), "A", 1.0, 1.0)
    day = _records_one_window([(1.0, 1.0), (2.0, 1.0)])
    built = build_windows(day + [late], min_companies=1)
    assert len(built.windows) == 1
    assert built.n_session_filtered == 1
    with pytest.raises(AllWindowsFiltered):
        build_windows([late], min_companies=1)


def test_session_boundaries():
    # [15:50, 16:00) is the last admissible default window
    last = QuoteRecord(_epoch(2011, 3, 16, 15, 55), "A", 1.0, 1.0)
    built = build_windows([last], min_companies=1)
    assert len(built.windows) == 1
    first = QuoteRecord(_epoch(2011, 3, 16, 9, 31), "A", 1.0, 1.0)
    built = build_windows([first], min_companies=1)
    assert len(built.windows) == 1
    early = QuoteRecord(_epoch(2011, 3, 16, 9, 25), "A", 1.0, 1.0)
    with pytest.raises(AllWindowsFiltered):
        build_windows([early], min_companies=1)


def test_session_filter_can_be_disabled():
    late = QuoteRecord(_epoch(2011, 3, 16, 16, 5), "A", 1.0, 1.0)
    built = build_windows([late], session_filter=False, min_companies=1)
    assert len(built.windows) == 1


def test_min_companies_filter_counted():
    records = _records_one_window([(1.0, 1.0), (2.0, 1.0)])
    with pytest.raises(AllWindowsFiltered):
        build_windows(records, min_companies=50)
    try:
        build_windows(records, min_companies=50)
    except AllWindowsFiltered as err:
        assert "below minimum: 1" in str(err)


def test_empty_input():
    with pytest.raises(EmptyInput):
        build_windows([])


@given(st.lists(st.tuples(st.floats(min_value=0.01, max_value=1e4),
                          st.floats(min_value=0.0, max_value=1e6)),
                min_size=2, max_size=40))
@settings(max_examples=60, deadline=None)
def test_window_mean_is_one_by_construction(values):
    if not any(p * v > 0.0 for p, v in values):
        return
    records = _records_one_window(values)
    built = build_windows(records, min_companies=1)
    for w in built.windows:
        assert w.samples.mean() == pytest.approx(1.0, rel=1e-12)
        assert np.all(w.samples > 0.0)


def test_company_count_bounded_by_records():
    records = _records_one_window([(1.0, 1.0)] * 5)
    built = build_windows(records, min_companies=1)
    assert sum(w.n_companies for w in built.windows) <= len(records)


def test_windowing_idempotent_bytes():
    records = _records_one_window(
        [(1.0 + i, 2.0 + (i % 3)) for i in range(12)])
    outputs = []
    for _ in range(2):
        built = build_windows(records, min_companies=1)
        buf = io.StringIO()
        write_windows_jsonl(built.windows, buf)
        outputs.append(buf.getvalue())
    assert outputs[0] == outputs[1]


def test_jsonl_round_trip():
    records = _records_one_window([(1.0, 2.0), (3.0, 4.0), (5.0, 6.0)])
    built = build_windows(records, min_companies=1)
    buf = io.StringIO()
    write_windows_jsonl(built.windows, buf)
    buf.seek(0)
    loaded = read_windows_jsonl(buf)
    assert len(loaded) == len(built.windows)
    for a, b in zip(built.windows, loaded):
        assert a.window_start == b.window_start
        assert a.n_companies == b.n_companies
        assert np.allclose(a.samples, b.samples)
    line = json.loads(io.StringIO(buf.getvalue()).readline())
    assert line["format_version"] == 1


def test_window_format_version_checked():
    d = window_to_dict(build_windows(
        _records_one_window([(1.0, 2.0), (3.0, 4.0)]),
        min_companies=1).windows[0])
    d["format_version"] = 99
    with pytest.raises(ValueError):
        window_from_dict(d)
