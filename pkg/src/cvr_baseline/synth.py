"""Synthetic feeder data with a known counterfactual.

Temperature is a yearly cycle (warmest mid-July) plus a daily cycle (warmest
at 15:00), a per-day weather offset and slowly varying noise.  Load is

    base + diurnal_amp * shape(hour) + temp_sensitivity * max(0, T - T0) + AR(1) noise

On CVR days the observed load inside the event is scaled by
``1 - factor * delta_v / 100`` and the voltage drops by ``delta_v`` percent;
the unscaled load is kept in ``Dataset.ground_truth``.
"""
from __future__ import annotations

import datetime as dt
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import InvalidConfig, NonDivisibleResolution
from .ingest import Dataset
from .seeds import rng_for
from .timeseries import CvrEvent, DayKind, DayRecord, Resolution, Window


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    days: int = 365
    start: str = "2023-01-01"
    resolution: int = 5
    base_kw: float = 1000.0
    diurnal_amp: float = 250.0
    temp_sensitivity: float = 15.0
    t0: float = 18.0
    # marginal standard deviation of the load noise
    noise_sd: float = 20.0
    ar_coeff: float = 0.7
    temp_mean: float = 12.0
    temp_seasonal_amp: float = 12.0
    temp_diurnal_amp: float = 6.0
    temp_day_sd: float = 2.5
    temp_noise_sd: float = 1.0
    temp_noise_hours: float = 3.0
    injected_cvr_factor: float = 0.8
    injected_delta_v_pct: float = 3.0
    n_events: int = 0
    event_start: str = "15:00"
    event_end: str = "18:00"
    event_months: tuple = (6, 7, 8)
    context_hours: float = 4.0
    # fraction of the CVR reduction recovered by a half-sine bounce after the first hour
    rebound: float = 0.0
    feeder_id: str = "synthetic"
    holidays: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "event_months", tuple(self.event_months))
        object.__setattr__(self, "holidays", tuple(self.holidays))
        try:
            res = Resolution(self.resolution)
            dt.date.fromisoformat(self.start)
        except (NonDivisibleResolution, ValueError) as err:
            raise InvalidConfig(str(err)) from None
        checks = [
            (self.base_kw > 0, "base_kw must be positive"),
            (self.noise_sd >= 0, "noise_sd must be non-negative"),
            (self.temp_noise_sd >= 0 and self.temp_day_sd >= 0, "temperature noise must be non-negative"),
            (0 <= self.ar_coeff < 1, "ar_coeff must be in [0, 1)"),
            (0 <= self.injected_cvr_factor <= 1.5, "injected_cvr_factor must be in [0, 1.5]"),
            (0 <= self.injected_delta_v_pct < 100, "injected_delta_v_pct must be in [0, 100)"),
            (self.days >= 1, "days must be positive"),
            (self.n_events >= 0, "n_events must be non-negative"),
            (self.temp_noise_hours > 0, "temp_noise_hours must be positive"),
            ((self.context_hours * 60) % self.resolution == 0, "context_hours must be a whole number of samples"),
        ]
        for ok, msg in checks:
            if not ok:
                raise InvalidConfig(msg)
        try:
            self.event_window(res)
        except ValueError as err:
            raise InvalidConfig(f"event window: {err}") from None

    @property
    def context_len(self) -> int:
        return int(round(self.context_hours * 60 / self.resolution))

    def event_window(self, res: Resolution) -> Window:
        start = res.index_of(self.event_start)
        stop = res.index_of(self.event_end, round_up=True)
        if stop - start < 2:
            raise ValueError("event spans fewer than two samples")
        return Window(start, stop - start)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["event_months"] = list(self.event_months)
        d["holidays"] = list(self.holidays)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidConfig(f"unknown synth fields: {sorted(unknown)}")
        return cls(**d)

    def replace(self, **kw) -> "SynthConfig":
        return SynthConfig(**{**asdict(self), **kw})


def load_shape(hours: np.ndarray) -> np.ndarray:
    """Dimensionless daily profile: evening peak near 17:00 and a morning bump."""
    return -0.7 * np.cos(2 * np.pi * (hours - 17) / 24) + 0.3 * np.exp(-(((hours - 8) / 1.5) ** 2))


def _ar_path(rng, n: int, phi: float, sd: float, start: float) -> np.ndarray:
    """AR(1) continuation from ``start`` with marginal standard deviation ``sd``."""
    if sd == 0:
        return np.zeros(n)
    eps = rng.normal(0.0, sd * math.sqrt(1 - phi * phi), n)
    out = np.empty(n)
    prev = start
    for k in range(n):
        prev = phi * prev + eps[k]
        out[k] = prev
    return out


def _event_days(cfg: SynthConfig, dates: list) -> list:
    holidays = {dt.date.fromisoformat(str(h)) for h in cfg.holidays}
    eligible = [d for d in dates if d.month in cfg.event_months and d not in holidays]
    if cfg.n_events > len(eligible):
        raise InvalidConfig(f"{cfg.n_events} events requested but only {len(eligible)} eligible days")
    if cfg.n_events == 0:
        return []
    picks = rng_for(cfg.seed, "events").choice(len(eligible), size=cfg.n_events, replace=False)
    return sorted(eligible[k] for k in picks)


def cvr_multiplier(cfg: SynthConfig, length: int, res: Resolution) -> np.ndarray:
    """Per-sample ratio of observed to counterfactual load inside an event."""
    reduction = cfg.injected_cvr_factor * cfg.injected_delta_v_pct / 100.0
    mult = np.full(length, 1.0 - reduction)
    hour = 60 // res.minutes
    if cfg.rebound and length > hour:
        k = np.arange(length - hour)
        mult[hour:] += cfg.rebound * reduction * np.sin(np.pi * (k + 0.5) / (length - hour))
    return mult


def generate(cfg: SynthConfig) -> Dataset:
    res = Resolution(cfg.resolution)
    spd = res.samples_per_day
    start = dt.date.fromisoformat(cfg.start)
    dates = [start + dt.timedelta(days=k) for k in range(cfg.days)]
    hours = np.arange(spd) * res.minutes / 60.0
    shape = load_shape(hours)
    phi_t = math.exp(-res.minutes / (60.0 * cfg.temp_noise_hours))
    holidays = {dt.date.fromisoformat(str(h)) for h in cfg.holidays}
    window = cfg.event_window(res)
    event_days = set(_event_days(cfg, dates))

    days, events, truth = {}, [], {}
    load_state = temp_state = 0.0
    for date in dates:
        doy = date.timetuple().tm_yday
        seasonal = cfg.temp_seasonal_amp * math.cos(2 * math.pi * (doy - 196) / 365.0)
        rng = rng_for(cfg.seed, "weather", date)
        offset = rng.normal(0.0, cfg.temp_day_sd) if cfg.temp_day_sd else 0.0
        t_noise = _ar_path(rng, spd, phi_t, cfg.temp_noise_sd, temp_state)
        temp_state = t_noise[-1]
        temp = (cfg.temp_mean + seasonal + offset + t_noise
                + cfg.temp_diurnal_amp * np.cos(2 * np.pi * (hours - 15) / 24))

        noise = _ar_path(rng_for(cfg.seed, "load", date), spd, cfg.ar_coeff, cfg.noise_sd, load_state)
        load_state = noise[-1]
        load = cfg.base_kw + cfg.diurnal_amp * shape + cfg.temp_sensitivity * np.maximum(0.0, temp - cfg.t0) + noise
        volt = np.ones(spd)

        kind = DayKind.HOLIDAY if date in holidays else DayKind.NON_CVR
        if date in event_days:
            truth[date] = load.copy()
            sl = slice(window.start_idx, window.stop)
            load = load.copy()
            load[sl] *= cvr_multiplier(cfg, window.len, res)
            volt[sl] *= 1.0 - cfg.injected_delta_v_pct / 100.0
            events.append(CvrEvent(date, window, cfg.context_len, cfg.injected_delta_v_pct))
            kind = DayKind.CVR
        days[date] = DayRecord(date, load, temp, res, volt, kind)
    return Dataset(res, days, events, cfg.feeder_id, ground_truth=truth)


def noiseless(cfg: SynthConfig) -> SynthConfig:
    """Same feeder with every day identical: no noise and no yearly cycle."""
    return cfg.replace(noise_sd=0.0, temp_noise_sd=0.0, temp_day_sd=0.0, temp_seasonal_amp=0.0)
