"""Calendar-indexed load/temperature/voltage model.

A day is the unit of everything downstream: similar-day screening, training
rows and evaluation all work on whole :class:`DayRecord` objects whose sample
vectors share one fixed :class:`Resolution`.
"""
from __future__ import annotations

import datetime as dt
import enum
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import MissingChannel, NonDivisibleResolution, OutOfBounds, TooShort, WindowDoesNotFit

ALLOWED_MINUTES = (5, 15, 30, 60)


@dataclass(frozen=True, order=True)
class Resolution:
    minutes: int

    def __post_init__(self):
        if self.minutes not in ALLOWED_MINUTES:
            raise NonDivisibleResolution(f"resolution must be one of {ALLOWED_MINUTES} minutes, got {self.minutes}")

    @property
    def samples_per_day(self) -> int:
        return 1440 // self.minutes

    def index_of(self, hhmm: str, round_up: bool = False) -> int:
        """Sample index of a ``HH:MM`` clock time (floor, or ceil with ``round_up``)."""
        hours, minutes = hhmm.split(":")
        total = int(hours) * 60 + int(minutes)
        if not 0 <= total <= 1440:
            raise ValueError(f"clock time out of range: {hhmm}")
        q, r = divmod(total, self.minutes)
        return q + 1 if (round_up and r) else q

    def clock(self, idx: int) -> str:
        total = idx * self.minutes
        return f"{total // 60:02d}:{total % 60:02d}"


class DayKind(enum.Enum):
    NON_CVR = "NonCvr"
    CVR = "Cvr"
    VIRTUAL_CVR = "VirtualCvr"
    HOLIDAY = "Holiday"


class Channel(enum.Enum):
    LOAD = "load"
    TEMP = "temperature"
    VOLT = "voltage"


def _frozen(values, name) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DayRecord:
    date: dt.date
    load: np.ndarray
    temperature: np.ndarray
    resolution: Resolution
    voltage: Optional[np.ndarray] = None
    kind: DayKind = DayKind.NON_CVR

    def __post_init__(self):
        n = self.resolution.samples_per_day
        object.__setattr__(self, "load", _frozen(self.load, "load"))
        object.__setattr__(self, "temperature", _frozen(self.temperature, "temperature"))
        if self.voltage is not None:
            object.__setattr__(self, "voltage", _frozen(self.voltage, "voltage"))
        for name in ("load", "temperature", "voltage"):
            arr = getattr(self, name)
            if arr is not None and arr.shape[0] != n:
                raise ValueError(f"{self.date}: {name} has {arr.shape[0]} samples, expected {n}")
        if not np.all(np.isfinite(self.load)):
            raise ValueError(f"{self.date}: load contains non-finite values")

    @property
    def samples_per_day(self) -> int:
        return self.resolution.samples_per_day

    def channel(self, channel: Channel) -> np.ndarray:
        arr = {Channel.LOAD: self.load, Channel.TEMP: self.temperature, Channel.VOLT: self.voltage}[channel]
        if arr is None:
            raise MissingChannel(f"{self.date}: no {channel.value} channel")
        return arr

    def with_kind(self, kind: DayKind) -> "DayRecord":
        return replace(self, kind=kind)

    def with_load(self, load) -> "DayRecord":
        return replace(self, load=load)


@dataclass(frozen=True)
class Window:
    start_idx: int
    len: int

    def __post_init__(self):
        if self.len <= 0:
            raise ValueError("window length must be positive")
        if self.start_idx < 0:
            raise OutOfBounds(f"window starts before midnight: {self.start_idx}")

    @property
    def stop(self) -> int:
        return self.start_idx + self.len

    def fits(self, samples_per_day: int) -> bool:
        return 0 <= self.start_idx and self.stop <= samples_per_day


@dataclass(frozen=True)
class CvrEvent:
    """A CVR event on one day.

    ``cvr_window`` covers samples ``t_on .. t_off`` inclusive; ``context_len``
    is the pre/post window length used to check that the event leaves room for
    context on both sides.
    """

    date: dt.date
    cvr_window: Window
    context_len: int
    delta_v_pct: Optional[float] = None

    def __post_init__(self):
        if self.cvr_window.len < 2:
            raise ValueError("a CVR window needs at least two samples")
        if self.context_len < 1:
            raise ValueError("context_len must be positive")

    @property
    def t_on(self) -> int:
        return self.cvr_window.start_idx

    @property
    def t_off(self) -> int:
        return self.cvr_window.stop - 1

    @property
    def length(self) -> int:
        return self.cvr_window.len

    def pre_window(self, w: Optional[int] = None) -> Window:
        w = self.context_len if w is None else w
        if self.t_on - w < 0:
            raise WindowDoesNotFit(f"{self.date}: pre window of {w} samples starts before midnight")
        return Window(self.t_on - w, w)

    def post_window(self, samples_per_day: int, w: Optional[int] = None) -> Window:
        w = self.context_len if w is None else w
        win = Window(self.t_off + 1, w)
        if not win.fits(samples_per_day):
            raise WindowDoesNotFit(f"{self.date}: post window of {w} samples runs past midnight")
        return win

    def validate(self, samples_per_day: int, w: Optional[int] = None) -> None:
        if not self.cvr_window.fits(samples_per_day):
            raise WindowDoesNotFit(f"{self.date}: CVR window does not fit in the day")
        self.pre_window(w)
        self.post_window(samples_per_day, w)

    def with_context(self, w: int) -> "CvrEvent":
        return replace(self, context_len=w)

    def on(self, date: dt.date) -> "CvrEvent":
        """Same geometry moved to another day (used for virtual CVR days)."""
        return replace(self, date=date, delta_v_pct=None)


def resample(day: DayRecord, target: Resolution) -> DayRecord:
    src = day.resolution.minutes
    if target.minutes % src:
        raise NonDivisibleResolution(f"cannot resample {src}-min data to {target.minutes}-min")
    factor = target.minutes // src
    if factor == 1:
        return day

    def block_mean(arr):
        return None if arr is None else arr.reshape(-1, factor).mean(axis=1)

    return DayRecord(
        date=day.date,
        load=block_mean(day.load),
        temperature=block_mean(day.temperature),
        voltage=block_mean(day.voltage),
        resolution=target,
        kind=day.kind,
    )


def slice_window(day: DayRecord, w: Window, channel: Channel = Channel.LOAD) -> np.ndarray:
    if not w.fits(day.samples_per_day):
        raise OutOfBounds(f"window [{w.start_idx}, {w.stop}) outside a {day.samples_per_day}-sample day")
    return day.channel(channel)[w.start_idx:w.stop]


def delta_series(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 2:
        raise TooShort("delta_series needs at least two values")
    return np.diff(values)


def integrate_deltas(anchor: float, deltas) -> np.ndarray:
    """Inverse of :func:`delta_series`: ``[anchor, anchor + d0, ...]``."""
    return np.concatenate(([anchor], anchor + np.cumsum(np.asarray(deltas, dtype=float))))


SEASONS = {
    12: "winter", 1: "winter", 2: "winter",
    3: "spring", 4: "spring", 5: "spring",
    6: "summer", 7: "summer", 8: "summer",
    9: "fall", 10: "fall", 11: "fall",
}


def season_of(date: dt.date) -> str:
    return SEASONS[date.month]


__all__ = [
    "ALLOWED_MINUTES", "Channel", "CvrEvent", "DayKind", "DayRecord", "Resolution", "Window",
    "delta_series", "integrate_deltas", "resample", "season_of", "slice_window",
]
