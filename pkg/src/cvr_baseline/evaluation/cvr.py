from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import EmptyInput, LengthMismatch, MissingChannel, ZeroMeanTarget, ZeroVoltageDelta
from ..timeseries import CvrEvent, DayRecord

Z95 = 1.96


@dataclass(frozen=True)
class CvrResult:
    cvr_factor: float
    delta_p_pct: float
    delta_v_pct: float
    per_step_factors: np.ndarray
    season: str = ""
    feeder_id: str = ""
    date: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "date": self.date,
            "feeder_id": self.feeder_id,
            "season": self.season,
            "cvr_factor": self.cvr_factor,
            "delta_p_pct": self.delta_p_pct,
            "delta_v_pct": self.delta_v_pct,
            "per_step_factors": [float(x) for x in self.per_step_factors],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CvrResult":
        return cls(float(d["cvr_factor"]), float(d["delta_p_pct"]), float(d["delta_v_pct"]),
                   np.asarray(d.get("per_step_factors", []), dtype=float), d.get("season", ""),
                   d.get("feeder_id", ""), d.get("date"))


def pct_drop(reference: float, value: float) -> float:
    return (reference - value) / reference * 100.0


def cvr_factor(baseline, observed, v_baseline: float, v_cvr: float, season: str = "", feeder_id: str = "",
               date: Optional[str] = None) -> CvrResult:
    """Percent load reduction over percent voltage reduction.

    Per-step factors use each step's load reduction against the event-average
    voltage reduction.
    """
    b = np.asarray(baseline, dtype=float)
    o = np.asarray(observed, dtype=float)
    if b.shape != o.shape or b.ndim != 1 or b.size == 0:
        raise LengthMismatch(f"baseline {b.shape} vs observed {o.shape}")
    if b.mean() <= 0:
        raise ZeroMeanTarget("baseline mean must be positive")
    dv = pct_drop(v_baseline, v_cvr)
    if dv == 0 or not math.isfinite(dv):
        raise ZeroVoltageDelta(f"voltage reduction is {dv}%")
    dp = pct_drop(b.mean(), o.mean())
    with np.errstate(divide="ignore", invalid="ignore"):
        steps = (b - o) / b * 100.0 / dv
    return CvrResult(dp / dv, dp, dv, steps, season, feeder_id, date)


def voltage_levels(day: DayRecord, event: CvrEvent, w: Optional[int] = None) -> tuple:
    """(pre-event mean voltage, event mean voltage) from the voltage channel."""
    if day.voltage is None:
        raise MissingChannel(f"{day.date}: no voltage channel and no delta_v_pct on the event")
    pre = event.pre_window(w)
    v_pre = float(np.mean(day.voltage[pre.start_idx:pre.stop]))
    v_cvr = float(np.mean(day.voltage[event.t_on:event.t_off + 1]))
    return v_pre, v_cvr


def event_voltages(day: DayRecord, event: CvrEvent) -> tuple:
    """Voltage pair for the factor: the event's stated reduction, else measured."""
    if event.delta_v_pct is not None:
        return 1.0, 1.0 - event.delta_v_pct / 100.0
    return voltage_levels(day, event)


def aggregate_cvr_report(results, group_by=("season", "feeder_id")) -> list:
    """Mean and normal-approximation 95% interval of the factor per group."""
    results = list(results)
    if not results:
        raise EmptyInput("no CVR results to aggregate")
    if isinstance(group_by, str):
        group_by = (group_by,)
    groups = {}
    for r in results:
        groups.setdefault(tuple(getattr(r, g) for g in group_by), []).append(r.cvr_factor)
    rows = []
    for key in sorted(groups):
        vals = np.asarray(groups[key], dtype=float)
        mean = float(vals.mean())
        half = Z95 * float(vals.std(ddof=1)) / math.sqrt(vals.size) if vals.size > 1 else 0.0
        row = dict(zip(group_by, key))
        row.update({"n": int(vals.size), "mean": mean, "ci_low": mean - half, "ci_high": mean + half})
        rows.append(row)
    return rows
