"""CSV / JSON ingestion into :class:`Dataset`.

File formats
------------
Load CSV
    ``timestamp,load_kw,temp_c[,voltage_pu]`` with ISO ``YYYY-MM-DDTHH:MM``
    local timestamps in strictly ascending order.  ``temp_c`` may be left out
    when temperature comes from a separate ``timestamp,temp_c`` file.
Event JSON
    ``[{"date": "YYYY-MM-DD", "start": "HH:MM", "end": "HH:MM", "delta_v_pct": 2.5}]``
    where ``end`` is exclusive in clock time (07:00-08:30 at 5-min covers
    samples 84..101).
Holiday file
    one ``YYYY-MM-DD`` per line.

Gaps of at most :data:`MAX_GAP` consecutive samples are linearly
interpolated; a day with a longer gap is rejected and listed in
``Dataset.rejected``.
"""
from __future__ import annotations

import csv
import datetime as dt
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import MalformedRow, UnknownDate, UnsortedTimestamps, WindowDoesNotFit, WrongSampleCount
from .timeseries import CvrEvent, DayKind, DayRecord, Resolution, Window

log = logging.getLogger(__name__)

MAX_GAP = 2
TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M"


@dataclass
class Dataset:
    resolution: Resolution
    days: dict = field(default_factory=dict)
    events: list = field(default_factory=list)
    feeder_id: str = "feeder"
    # date -> reason for days dropped at ingest
    rejected: dict = field(default_factory=dict)
    # date -> number of samples filled by gap interpolation
    interpolated: dict = field(default_factory=dict)
    # date -> counterfactual load; only populated by the synthetic generator
    ground_truth: dict = field(default_factory=dict)

    def __post_init__(self):
        self.days = dict(sorted(self.days.items()))
        for day in self.days.values():
            if day.resolution != self.resolution:
                raise ValueError(f"{day.date}: resolution {day.resolution} differs from dataset {self.resolution}")

    @property
    def dates(self) -> list:
        return list(self.days)

    def day(self, date: dt.date) -> DayRecord:
        try:
            return self.days[date]
        except KeyError:
            raise UnknownDate(f"{date} not in dataset") from None

    def dates_of_kind(self, *kinds: DayKind) -> list:
        return [d for d, rec in self.days.items() if rec.kind in kinds]

    def event_on(self, date: dt.date) -> CvrEvent:
        for ev in self.events:
            if ev.date == date:
                return ev
        raise UnknownDate(f"no event on {date}")

    def with_kinds(self, kinds: dict) -> "Dataset":
        """Copy with some day kinds replaced (``{date: DayKind}``)."""
        days = dict(self.days)
        for date, kind in kinds.items():
            days[date] = self.day(date).with_kind(kind)
        return replace(self, days=days, events=list(self.events))

    def add_events(self, events: Iterable[CvrEvent]) -> "Dataset":
        events = list(events)
        out = self.with_kinds({ev.date: DayKind.CVR for ev in events})
        out.events = sorted(self.events + events, key=lambda e: e.date)
        return out


def parse_timestamp(text: str) -> dt.datetime:
    return dt.datetime.strptime(text.strip(), TIMESTAMP_FORMAT)


def _parse_value(text: Optional[str]) -> float:
    """Float or NaN for an empty / 'nan' field; raises ValueError otherwise."""
    if text is None:
        return math.nan
    text = text.strip()
    if text == "" or text.lower() in ("nan", "na"):
        return math.nan
    return float(text)


def _read_series(path, resolution: Resolution, columns: tuple) -> tuple:
    """Read a timestamped CSV onto a contiguous sample grid.

    Returns ``(first_date, n_days, {column: array}, present_mask)``.
    """
    step = dt.timedelta(minutes=resolution.minutes)
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0].strip() != "timestamp":
            raise MalformedRow(1, "header must start with 'timestamp'")
        header = [h.strip() for h in header]
        missing = [c for c in columns if c in ("load_kw",) and c not in header]
        if missing:
            raise MalformedRow(1, f"missing column(s) {missing}")
        col_idx = {c: header.index(c) for c in columns if c in header}
        prev = None
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise MalformedRow(lineno, f"expected {len(header)} fields, got {len(row)}")
            try:
                ts = parse_timestamp(row[0])
                values = {c: _parse_value(row[i]) for c, i in col_idx.items()}
            except ValueError as exc:
                raise MalformedRow(lineno, str(exc)) from None
            if (ts.hour * 60 + ts.minute) % resolution.minutes:
                raise MalformedRow(lineno, f"{row[0]} is off the {resolution.minutes}-min grid")
            if prev is not None:
                if ts == prev:
                    raise MalformedRow(lineno, f"duplicate timestamp {row[0]}")
                if ts < prev:
                    raise UnsortedTimestamps(f"line {lineno}: {row[0]} precedes the previous row")
            prev = ts
            rows.append((ts, values))
    if not rows:
        return None, 0, {c: np.empty(0) for c in col_idx}, np.empty(0, dtype=bool)

    first_date = rows[0][0].date()
    n_days = (rows[-1][0].date() - first_date).days + 1
    spd = resolution.samples_per_day
    origin = dt.datetime.combine(first_date, dt.time())
    data = {c: np.full(n_days * spd, np.nan) for c in col_idx}
    present = np.zeros(n_days * spd, dtype=bool)
    for ts, values in rows:
        k = (ts - origin) // step
        present[k] = True
        for c, v in values.items():
            data[c][k] = v
    return first_date, n_days, data, present


def fill_short_gaps(values: np.ndarray, max_gap: int = MAX_GAP) -> tuple:
    """Linearly interpolate interior NaN runs of length <= ``max_gap``.

    Returns the repaired copy and a boolean mask of the filled positions.
    Longer runs and runs touching either end are left as NaN.
    """
    out = np.array(values, dtype=float)
    filled = np.zeros(out.shape[0], dtype=bool)
    isnan = np.isnan(out)
    k = 0
    n = out.shape[0]
    while k < n:
        if not isnan[k]:
            k += 1
            continue
        j = k
        while j < n and isnan[j]:
            j += 1
        # run is [k, j)
        if k > 0 and j < n and j - k <= max_gap:
            left, right = out[k - 1], out[j]
            frac = np.arange(1, j - k + 1) / (j - k + 1)
            out[k:j] = left + frac * (right - left)
            filled[k:j] = True
        k = j
    return out, filled


def read_holidays(path) -> set:
    out = set()
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            out.add(dt.date.fromisoformat(line))
    return out


def load_csv(path, resolution: Resolution, holidays: Optional[Iterable[dt.date]] = None,
             temperature_path=None, feeder_id: Optional[str] = None, strict: bool = False) -> Dataset:
    """Read a load CSV into a :class:`Dataset`.

    Days whose gaps cannot be repaired are dropped (``Dataset.rejected``);
    with ``strict=True`` the first such day raises :class:`WrongSampleCount`.
    """
    first, n_days, data, present = _read_series(path, resolution, ("load_kw", "temp_c", "voltage_pu"))
    spd = resolution.samples_per_day
    if temperature_path is not None:
        t_first, t_days, t_data, _ = _read_series(temperature_path, resolution, ("temp_c",))
        temp = np.full(n_days * spd, np.nan)
        if t_first is not None and first is not None:
            offset = (t_first - first).days * spd
            src = t_data["temp_c"]
            lo, hi = max(offset, 0), min(offset + src.shape[0], temp.shape[0])
            if hi > lo:
                temp[lo:hi] = src[lo - offset:hi - offset]
        data["temp_c"] = temp
    if "temp_c" not in data:
        raise MalformedRow(1, "no temperature column and no temperature file")

    holidays = set(holidays or ())
    load, load_filled = fill_short_gaps(data["load_kw"])
    temp, _ = fill_short_gaps(data["temp_c"])
    volt = fill_short_gaps(data["voltage_pu"])[0] if "voltage_pu" in data else None
    days, rejected, interpolated = {}, {}, {}
    for d in range(n_days):
        date = first + dt.timedelta(days=d)
        sl = slice(d * spd, (d + 1) * spd)
        if not present[sl].any():
            continue
        day_load, day_temp = load[sl], temp[sl]
        day_volt = None if volt is None else volt[sl]
        usable = int(np.isfinite(day_load).sum())
        bad = usable < spd or not np.all(np.isfinite(day_temp))
        if day_volt is not None and not np.all(np.isfinite(day_volt)):
            bad = True
        if bad:
            if strict:
                raise WrongSampleCount(date, usable, spd)
            rejected[date] = f"{spd - usable} load samples missing after gap repair"
            log.info("rejecting %s: %s", date, rejected[date])
            continue
        kind = DayKind.HOLIDAY if date in holidays else DayKind.NON_CVR
        days[date] = DayRecord(date, day_load, day_temp, resolution, day_volt, kind)
        interpolated[date] = int(load_filled[sl].sum())
    if feeder_id is None:
        feeder_id = Path(path).stem
    return Dataset(resolution, days, [], feeder_id, rejected, interpolated)


def parse_event(obj: dict, resolution: Resolution, context_len: int) -> CvrEvent:
    date = dt.date.fromisoformat(obj["date"])
    start = resolution.index_of(obj["start"])
    end_text = "24:00" if obj["end"] in ("23:59", "24:00") else obj["end"]
    stop = resolution.index_of(end_text, round_up=True)
    if obj["end"] == "23:59":
        stop = resolution.samples_per_day
    if stop - start < 2:
        raise WindowDoesNotFit(f"{date}: event {obj['start']}-{obj['end']} spans fewer than two samples")
    dv = obj.get("delta_v_pct")
    return CvrEvent(date, Window(start, stop - start), context_len, None if dv is None else float(dv))


def load_events(path, dataset: Dataset, context_len: int) -> Dataset:
    """Attach the events in a JSON file; marks their days as CVR days."""
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, list):
        raise MalformedRow(1, "event file must hold a JSON array")
    events = []
    for obj in raw:
        ev = parse_event(obj, dataset.resolution, context_len)
        if ev.date not in dataset.days:
            raise UnknownDate(f"event date {ev.date} not in dataset")
        ev.validate(dataset.resolution.samples_per_day)
        events.append(ev)
    return dataset.add_events(events)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def write_csv(dataset: Dataset, path, load_override: Optional[dict] = None) -> None:
    """Write days back out in the load-CSV format (6-decimal floats)."""
    res = dataset.resolution
    has_volt = any(day.voltage is not None for day in dataset.days.values())
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "load_kw", "temp_c"] + (["voltage_pu"] if has_volt else []))
        for date, day in dataset.days.items():
            load = day.load if load_override is None else load_override.get(date, day.load)
            origin = dt.datetime.combine(date, dt.time())
            for k in range(res.samples_per_day):
                ts = (origin + dt.timedelta(minutes=k * res.minutes)).strftime(TIMESTAMP_FORMAT)
                row = [ts, _fmt(load[k]), _fmt(day.temperature[k])]
                if has_volt:
                    row.append(_fmt(day.voltage[k]) if day.voltage is not None else "")
                w.writerow(row)


def event_to_json(ev: CvrEvent, resolution: Resolution) -> dict:
    out = {
        "date": ev.date.isoformat(),
        "start": resolution.clock(ev.t_on),
        "end": resolution.clock(ev.t_off + 1) if ev.t_off + 1 < resolution.samples_per_day else "23:59",
    }
    if ev.delta_v_pct is not None:
        out["delta_v_pct"] = ev.delta_v_pct
    return out


def write_events(dataset: Dataset, path) -> None:
    Path(path).write_text(json.dumps([event_to_json(ev, dataset.resolution) for ev in dataset.events], indent=2) + "\n")


def write_holidays(dates: Iterable[dt.date], path) -> None:
    days = sorted(dt.date.fromisoformat(str(d)) for d in dates)
    Path(path).write_text("".join(f"{d.isoformat()}\n" for d in days))
