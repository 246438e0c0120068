import datetime as dt

import numpy as np
import pytest

from cvr_baseline.ingest import Dataset
from cvr_baseline.timeseries import DayKind, DayRecord, Resolution

D0 = dt.date(2023, 7, 3)


def make_day(date=D0, load=None, temp=None, minutes=60, kind=DayKind.NON_CVR, voltage=None):
    res = Resolution(minutes)
    n = res.samples_per_day
    load = np.full(n, 100.0) if load is None else np.broadcast_to(np.asarray(load, dtype=float), (n,))
    temp = np.full(n, 25.0) if temp is None else np.broadcast_to(np.asarray(temp, dtype=float), (n,))
    return DayRecord(date, load, temp, res, voltage, kind)


def make_dataset(days, minutes=60, events=()):
    ds = Dataset(Resolution(minutes), {d.date: d for d in days})
    return ds.add_events(events) if events else ds


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, filled in by test_acceptance
CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA, key=lambda k: (int(k.split(".")[0]), k)):
        ok, detail = CRITERIA[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
