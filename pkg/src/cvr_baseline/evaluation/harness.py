"""Virtual-CVR-day evaluation.

Non-CVR days of one season get a pretend event window.  Their true load is
known, so each estimator variant can be scored against it.  Evaluation days
are marked virtual-CVR first, which removes them from every similar-day pool,
from the ramp-bound history and from the weight-derivation days.
"""
from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .. import gbt
from ..bidir import (EngineConfig, TargetMode, derive_weights, estimate_baseline,
                     oneshot_from_estimate)
from ..errors import ConfigError, InsufficientVirtualDays
from ..ingest import Dataset, parse_event
from ..timeseries import CvrEvent, DayKind, season_of
from .metrics import metrics

log = logging.getLogger(__name__)

VARIANTS = ("forward", "backward", "reconciled", "oneshot", "dP", "P")


@dataclass(frozen=True)
class EvalProtocol:
    season: str = "summer"
    start: str = "15:00"
    end: str = "18:00"
    count: int = 50
    # forecasting context in samples; None means four hours
    context_len: Optional[int] = None
    n_weight_days: int = 20
    variants: tuple = VARIANTS
    eval_days: Optional[tuple] = None

    def __post_init__(self):
        bad = set(self.variants) - set(VARIANTS)
        if bad:
            raise ConfigError(f"unknown variants {sorted(bad)}")
        if self.count < 1 or self.n_weight_days < 1:
            raise ConfigError("count and n_weight_days must be positive")


SUMMER = EvalProtocol()
WINTER = EvalProtocol(season="winter", start="07:00", end="08:30")


@dataclass
class EvaluationResult:
    protocol: EvalProtocol
    days: list
    truth: dict
    # variant -> {date: restored segment}
    predictions: dict
    reports: dict
    schedules: dict = field(default_factory=dict)
    clamp_events: int = 0

    def per_day(self, variant: str, metric: str = "nrmse") -> np.ndarray:
        return np.array([getattr(m, metric) for m in self.reports[variant].per_day])

    def step_errors(self, variant: str) -> np.ndarray:
        """Absolute error per (day, step), days in evaluation order."""
        return np.vstack([np.abs(self.predictions[variant][d] - self.truth[d]) for d in self.days])

    def long_rows(self) -> list:
        rows = []
        for variant, report in self.reports.items():
            for d, m in zip(self.days, report.per_day):
                for name, value in m.as_dict().items():
                    rows.append((d.isoformat(), variant, name, value))
        return sorted(rows)

    def summary(self) -> dict:
        return {
            "season": self.protocol.season,
            "window": [self.protocol.start, self.protocol.end],
            "days": [d.isoformat() for d in self.days],
            "variants": {v: r.as_dict() for v, r in self.reports.items()},
            "nrmse_std": {v: float(np.std(self.per_day(v), ddof=1)) if len(self.days) > 1 else 0.0
                          for v in self.reports},
            "clamp_events": self.clamp_events,
        }


def _spread(items: list, k: int) -> list:
    """``k`` items evenly spaced through ``items`` (all of them if fewer)."""
    if k >= len(items):
        return list(items)
    idx = np.unique(np.round(np.linspace(0, len(items) - 1, k)).astype(int))
    return [items[i] for i in idx]


def _spread_order(items: list, k: int) -> list:
    """Evenly spaced ``k`` items first, then the rest as fallbacks."""
    first = _spread(items, k)
    chosen = set(first)
    return first + [x for x in items if x not in chosen]


def event_template(dataset: Dataset, protocol: EvalProtocol, date: dt.date) -> CvrEvent:
    res = dataset.resolution
    w = protocol.context_len if protocol.context_len is not None else 240 // res.minutes
    return parse_event({"date": date.isoformat(), "start": protocol.start, "end": protocol.end}, res, w)


def choose_days(dataset: Dataset, protocol: EvalProtocol) -> tuple:
    """(evaluation days, ordered weight-derivation candidates)."""
    pool = [d for d in dataset.dates_of_kind(DayKind.NON_CVR) if season_of(d) == protocol.season]
    if protocol.eval_days is not None:
        eval_days = sorted(protocol.eval_days)
        missing = [d for d in eval_days if d not in pool]
        if missing:
            raise ConfigError(f"evaluation days not eligible: {missing}")
    else:
        if len(pool) < protocol.count:
            raise InsufficientVirtualDays(f"{len(pool)} eligible {protocol.season} days, need {protocol.count}")
        eval_days = _spread(pool, protocol.count)
    taken = set(eval_days)
    rest = [d for d in pool if d not in taken]
    return eval_days, _spread_order(rest, protocol.n_weight_days)


def run_virtual_evaluation(dataset: Dataset, protocol: EvalProtocol, engine: EngineConfig,
                           hp: gbt.GbtHyperparams, seed: int = 0, schedules: Optional[dict] = None,
                           hp_by_mode: Optional[dict] = None) -> EvaluationResult:
    """Score every requested variant on ``protocol.count`` virtual event days.

    ``schedules`` maps target modes to precomputed weight schedules; missing
    ones are derived here.  The forward, backward, reconciled and one-shot
    variants use ``engine.mode``; ``P`` and ``dP`` are the reconciled
    estimates in each target mode.
    """
    eval_days, weight_days = choose_days(dataset, protocol)
    marked = dataset.with_kinds({d: DayKind.VIRTUAL_CVR for d in eval_days})
    template = event_template(marked, protocol, eval_days[0])
    modes = [engine.mode]
    for name, mode in (("P", TargetMode.LOAD_LEVEL), ("dP", TargetMode.LOAD_CHANGE)):
        if name in protocol.variants and mode not in modes:
            modes.append(mode)
    schedules = dict(schedules or {})
    hp_by_mode = dict(hp_by_mode or {})
    cfgs = {m: replace(engine, mode=m) for m in modes}
    for m in modes:
        if m not in schedules:
            log.info("deriving %s weights from %d virtual days", m.value, protocol.n_weight_days)
            schedules[m] = derive_weights(marked, template, protocol.n_weight_days, cfgs[m], hp_by_mode.get(m, hp),
                                          seed, virtual_days=weight_days)

    preds = {v: {} for v in protocol.variants}
    truth = {}
    clamps = 0
    for date in eval_days:
        ev = template.on(date)
        sl = slice(ev.t_on, ev.t_off + 1)
        # the day is marked virtual, but its recorded load is the ground truth
        truth[date] = np.array(marked.day(date).load[sl])
        for m in modes:
            est = estimate_baseline(marked, ev, cfgs[m], hp_by_mode.get(m, hp), schedules[m], seed)
            clamps += est.clamp_events
            if m is engine.mode:
                for name, values in (("forward", est.forward_full), ("backward", est.backward_full),
                                     ("reconciled", est.restored)):
                    if name in preds:
                        preds[name][date] = values
                if "oneshot" in preds:
                    preds["oneshot"][date] = oneshot_from_estimate(est, schedules[m])
            name = "P" if m is TargetMode.LOAD_LEVEL else "dP"
            if name in preds:
                preds[name][date] = est.restored
    reports = {
        v: metrics([truth[d] for d in eval_days], [preds[v][d] for d in eval_days]) for v in protocol.variants
    }
    return EvaluationResult(protocol, list(eval_days), truth, preds, reports, schedules, clamps)


def edge_error_shares(result: EvaluationResult, band: int = 1) -> dict:
    """Share of days whose unidirectional error is larger at the far edge.

    Errors are mean absolute errors over ``band`` steps at each edge; the
    near edge is the one next to the direction's context.
    """
    out = {}
    for variant, near_first in (("forward", True), ("backward", False)):
        if variant not in result.predictions:
            continue
        err = result.step_errors(variant)
        head = err[:, :band].mean(axis=1)
        tail = err[:, -band:].mean(axis=1)
        near, far = (head, tail) if near_first else (tail, head)
        out[variant] = float(np.mean(far > near))
    return out
