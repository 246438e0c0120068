import datetime as dt
import json

import numpy as np
import pytest

from cvr_baseline.errors import MalformedRow, UnknownDate, UnsortedTimestamps, WindowDoesNotFit, WrongSampleCount
from cvr_baseline.ingest import fill_short_gaps, load_csv, load_events, parse_event, write_csv, write_events
from cvr_baseline.timeseries import DayKind, Resolution, Window

RES5 = Resolution(5)


def rows_for(date, minutes=5, skip=(), load=lambda k: 100.0 + k, volt=False):
    origin = dt.datetime.combine(date, dt.time())
    out = []
    for k in range(1440 // minutes):
        if k in skip:
            continue
        ts = (origin + dt.timedelta(minutes=k * minutes)).strftime("%Y-%m-%dT%H:%M")
        row = f"{ts},{load(k):.6f},{20 + k / 100:.6f}"
        out.append(row + (",1.000000" if volt else ""))
    return out


def write(tmp_path, lines, header="timestamp,load_kw,temp_c", name="load.csv"):
    p = tmp_path / name
    p.write_text("\n".join([header] + lines) + "\n")
    return p


def test_one_complete_day(tmp_path):
    p = write(tmp_path, rows_for(dt.date(2023, 7, 1)))
    ds = load_csv(p, RES5)
    assert ds.dates == [dt.date(2023, 7, 1)]
    assert ds.day(dt.date(2023, 7, 1)).load[5] == 105.0


def test_single_gap_interpolated(tmp_path):
    p = write(tmp_path, rows_for(dt.date(2023, 7, 1), skip={100}))
    ds = load_csv(p, RES5)
    day = ds.day(dt.date(2023, 7, 1))
    assert day.load[100] == pytest.approx(200.0)
    assert ds.interpolated[dt.date(2023, 7, 1)] == 1


def test_long_gap_rejects_day(tmp_path):
    lines = rows_for(dt.date(2023, 7, 1), skip={10, 11, 12}) + rows_for(dt.date(2023, 7, 2))
    ds = load_csv(write(tmp_path, lines), RES5)
    assert ds.dates == [dt.date(2023, 7, 2)]
    assert dt.date(2023, 7, 1) in ds.rejected


def test_long_gap_strict(tmp_path):
    p = write(tmp_path, rows_for(dt.date(2023, 7, 1), skip={10, 11, 12}))
    with pytest.raises(WrongSampleCount):
        load_csv(p, RES5, strict=True)


def test_duplicate_timestamp(tmp_path):
    lines = rows_for(dt.date(2023, 7, 1))
    lines.insert(5, lines[4])
    with pytest.raises(MalformedRow):
        load_csv(write(tmp_path, lines), RES5)


def test_unsorted(tmp_path):
    lines = rows_for(dt.date(2023, 7, 1))
    lines[4], lines[5] = lines[5], lines[4]
    with pytest.raises(UnsortedTimestamps):
        load_csv(write(tmp_path, lines), RES5)


@pytest.mark.parametrize("bad", ["2023-07-01T00:00,abc,20", "2023-07-01T00:00,1", "07/01/2023 00:00,1,2",
                                 "2023-07-01T00:03,1,2"])
def test_malformed_rows(tmp_path, bad):
    with pytest.raises(MalformedRow) as info:
        load_csv(write(tmp_path, [bad]), RES5)
    assert info.value.line == 2


def test_bad_header(tmp_path):
    with pytest.raises(MalformedRow):
        load_csv(write(tmp_path, rows_for(dt.date(2023, 7, 1)), header="time,load_kw,temp_c"), RES5)


def test_holidays_flagged(tmp_path):
    lines = rows_for(dt.date(2023, 7, 3)) + rows_for(dt.date(2023, 7, 4))
    ds = load_csv(write(tmp_path, lines), RES5, holidays={dt.date(2023, 7, 4)})
    assert ds.day(dt.date(2023, 7, 4)).kind is DayKind.HOLIDAY
    assert ds.dates_of_kind(DayKind.NON_CVR) == [dt.date(2023, 7, 3)]


def test_separate_temperature_file(tmp_path):
    date = dt.date(2023, 7, 1)
    load_lines = [",".join(r.split(",")[:2]) for r in rows_for(date)]
    temp_lines = [r.split(",")[0] + ",30.5" for r in rows_for(date)]
    p = write(tmp_path, load_lines, header="timestamp,load_kw")
    t = write(tmp_path, temp_lines, header="timestamp,temp_c", name="temp.csv")
    ds = load_csv(p, RES5, temperature_path=t)
    assert np.all(ds.day(date).temperature == 30.5)


def test_round_trip(tmp_path):
    lines = rows_for(dt.date(2023, 7, 1), volt=True) + rows_for(dt.date(2023, 7, 2), volt=True)
    ds = load_csv(write(tmp_path, lines, header="timestamp,load_kw,temp_c,voltage_pu"), RES5)
    out = tmp_path / "again.csv"
    write_csv(ds, out)
    again = load_csv(out, RES5)
    for d in ds.dates:
        assert np.array_equal(ds.day(d).load, again.day(d).load)
        assert np.array_equal(ds.day(d).temperature, again.day(d).temperature)
        assert np.array_equal(ds.day(d).voltage, again.day(d).voltage)


def test_row_count_conservation(tmp_path):
    lines = rows_for(dt.date(2023, 7, 1), skip={7, 50, 51}) + rows_for(dt.date(2023, 7, 2), skip={3})
    ds = load_csv(write(tmp_path, lines), RES5)
    assert len(ds.days) * 288 == len(lines) + sum(ds.interpolated.values())


def test_fill_short_gaps_edges_left_alone():
    vals = np.array([np.nan, 1.0, np.nan, 3.0, np.nan, np.nan, np.nan, 7.0, np.nan])
    out, filled = fill_short_gaps(vals)
    assert out[2] == 2.0 and filled.tolist().count(True) == 1
    assert np.isnan(out[0]) and np.isnan(out[-1]) and np.isnan(out[5])


@pytest.mark.parametrize("start,end,window", [("15:00", "18:00", Window(180, 36)), ("07:00", "08:30", Window(84, 18))])
def test_parse_event(start, end, window):
    ev = parse_event({"date": "2023-07-01", "start": start, "end": end}, RES5, 24)
    assert ev.cvr_window == window


def test_event_late_window_does_not_fit(tmp_path):
    p = write(tmp_path, rows_for(dt.date(2023, 7, 1)))
    ds = load_csv(p, RES5)
    ev_file = tmp_path / "events.json"
    ev_file.write_text(json.dumps([{"date": "2023-07-01", "start": "21:00", "end": "23:59"}]))
    with pytest.raises(WindowDoesNotFit):
        load_events(ev_file, ds, 48)


def test_event_unknown_date(tmp_path):
    ds = load_csv(write(tmp_path, rows_for(dt.date(2023, 7, 1))), RES5)
    ev_file = tmp_path / "events.json"
    ev_file.write_text(json.dumps([{"date": "2023-07-09", "start": "15:00", "end": "18:00"}]))
    with pytest.raises(UnknownDate):
        load_events(ev_file, ds, 24)


def test_events_mark_days_and_round_trip(tmp_path):
    ds = load_csv(write(tmp_path, rows_for(dt.date(2023, 7, 1))), RES5)
    ev_file = tmp_path / "events.json"
    ev_file.write_text(json.dumps([{"date": "2023-07-01", "start": "15:00", "end": "18:00", "delta_v_pct": 2.5}]))
    ds = load_events(ev_file, ds, 24)
    assert ds.day(dt.date(2023, 7, 1)).kind is DayKind.CVR
    assert ds.events[0].delta_v_pct == 2.5
    out = tmp_path / "events2.json"
    write_events(ds, out)
    assert json.loads(out.read_text()) == json.loads(ev_file.read_text())
