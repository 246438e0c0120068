"""Iterative restoration of a CVR segment and derivation of its weights.

Each iteration forecasts the remaining segment from both sides, keeps only
the reconciled outermost pair and writes it into a working copy of the
target day's load, so the next iteration's context windows include it.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import gbt
from ..errors import EmptyHistory, InconsistentWeightSchedule, InsufficientSimilarDays, InsufficientVirtualDays
from ..ingest import Dataset
from ..similar import (SimilarDaySets, SimilarityConfig, rank_by_similarity, score_candidates,
                       select_similar_days, sets_from_scores)
from ..timeseries import CvrEvent, season_of
from .forecast import RampBounds, forecast_segment_detail, ramp_bounds
from .training import Direction, TargetMode, build_training_set, feature_row, geometry, n_iterations
from .weights import WeightEntry, WeightSchedule, reconcile_oneshot, reconcile_step, solve_oneshot, solve_pair

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EngineConfig:
    similarity: SimilarityConfig = field(default_factory=SimilarityConfig)
    # forecasting context length; None uses the event's own
    context_len: Optional[int] = None
    mode: TargetMode = TargetMode.LOAD_LEVEL
    # in load-level mode, later iterations only fit the two steps they keep
    endpoints_only: bool = True
    # ramp bounds from the event's season only (falls back to all days)
    seasonal_ramps: bool = True
    n_virtual_days: int = 10
    # explicit threshold relaxation: up to this many retries, each scaling eps by relax_factor
    relax_retries: int = 0
    relax_factor: float = 1.25

    def __post_init__(self):
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", TargetMode(self.mode))


@dataclass
class BaselineEstimate:
    restored: np.ndarray
    # chronological forecasts of each iteration's remaining segment (NaN where not fitted)
    forward_raw: list
    backward_raw: list
    iterations: int
    clamp_events: int
    write_counts: np.ndarray
    pools: Optional[SimilarDaySets] = None

    @property
    def forward_full(self) -> np.ndarray:
        return self.forward_raw[0]

    @property
    def backward_full(self) -> np.ndarray:
        return self.backward_raw[0]


def _bounds_for(dataset: Dataset, event: CvrEvent, cfg: EngineConfig) -> Optional[RampBounds]:
    if cfg.mode is not TargetMode.LOAD_CHANGE:
        return None
    if cfg.seasonal_ramps:
        try:
            return ramp_bounds(dataset, season_of(event.date))
        except EmptyHistory:
            log.info("no %s history for ramp bounds; using all seasons", season_of(event.date))
    return ramp_bounds(dataset)


class _Restoration:
    """Working state for one target day."""

    def __init__(self, dataset: Dataset, event: CvrEvent, cfg: EngineConfig, hp: gbt.GbtHyperparams, seed: int,
                 pools: SimilarDaySets, bounds: Optional[RampBounds]):
        self.dataset = dataset
        self.event = event
        self.cfg = cfg
        self.hp = hp
        self.seed = seed
        self.pools = pools
        self.bounds = bounds
        self.w = event.context_len if cfg.context_len is None else cfg.context_len
        event.validate(dataset.resolution.samples_per_day, self.w)
        day = dataset.day(event.date)
        self.load = np.array(day.load, dtype=float)
        self.temperature = day.temperature
        self.length = event.length
        self.restored = np.full(self.length, np.nan)
        self.write_counts = np.zeros(self.length, dtype=np.int64)
        self.forward_raw, self.backward_raw = [], []
        self.clamp_events = 0

    def forecast(self, i: int) -> tuple:
        g = geometry(self.event, i, self.w)
        full = i == 1 or not self.cfg.endpoints_only
        steps = None if full else [0, -1]
        out = []
        for direction, pool in ((Direction.FORWARD, self.pools.forward), (Direction.BACKWARD, self.pools.backward)):
            ts = build_training_set(self.dataset, self.event, pool, direction, self.cfg.mode, i, self.w,
                                    min_days=self.cfg.similarity.eps_sim)
            x = feature_row(self.load, self.temperature, g, direction, self.dataset.resolution.minutes)
            fc = forecast_segment_detail(ts, x, self.hp, self.seed, anchor=self.load[g.anchor_index(direction)],
                                         bounds=self.bounds, steps=steps)
            self.clamp_events += fc.clamped
            out.append(fc.values)
        self.forward_raw.append(out[0])
        self.backward_raw.append(out[1])
        return out[0], out[1]

    def write(self, i: int, left: float, right: float) -> None:
        lo, hi = i - 1, self.length - i
        positions = (lo,) if lo == hi else (lo, hi)
        for pos, val in zip(positions, (left, right)):
            self.restored[pos] = val
            self.write_counts[pos] += 1
            self.load[self.event.t_on + pos] = val

    def result(self) -> BaselineEstimate:
        return BaselineEstimate(self.restored.copy(), self.forward_raw, self.backward_raw, len(self.forward_raw),
                                self.clamp_events, self.write_counts.copy(), self.pools)


def select_pools(dataset: Dataset, event: CvrEvent, cfg: EngineConfig, exclude=()) -> SimilarDaySets:
    """Similar-day pools, relaxing the thresholds only as ``cfg`` allows."""
    sim = cfg.similarity
    for attempt in range(cfg.relax_retries + 1):
        try:
            return select_similar_days(dataset, event, sim, exclude=exclude)
        except InsufficientSimilarDays as err:
            if attempt == cfg.relax_retries:
                raise
            sim = sim.scaled(cfg.relax_factor)
            log.warning("%s: %s; retrying with eps_f=%.4g eps_b=%.4g", event.date, err, sim.eps_f, sim.eps_b)


def estimate_baseline(dataset: Dataset, event: CvrEvent, cfg: EngineConfig, hp: gbt.GbtHyperparams,
                      weights: WeightSchedule, seed: int = 0, exclude=(),
                      pools: Optional[SimilarDaySets] = None) -> BaselineEstimate:
    """Restore the event's segment two samples per iteration, outside in."""
    weights.check_length(event.length)
    pools = select_pools(dataset, event, cfg, exclude) if pools is None else pools
    state = _Restoration(dataset, event, cfg, hp, seed, pools, _bounds_for(dataset, event, cfg))
    for i in range(1, n_iterations(event.length) + 1):
        fwd, bwd = state.forecast(i)
        state.write(i, *reconcile_step(fwd, bwd, weights.entries[i - 1]))
    return state.result()


def oneshot_from_estimate(estimate: BaselineEstimate, weights: WeightSchedule) -> np.ndarray:
    """Per-index combination of the first iteration's full forecasts."""
    if weights.beta1 is None or weights.beta2 is None:
        raise InconsistentWeightSchedule("schedule has no one-pass weights")
    weights.check_length(estimate.forward_full.shape[0])
    return reconcile_oneshot(estimate.forward_full, estimate.backward_full, weights.beta1, weights.beta2)


def estimate_baseline_oneshot(dataset: Dataset, event: CvrEvent, cfg: EngineConfig, hp: gbt.GbtHyperparams,
                              weights: WeightSchedule, seed: int = 0, exclude=(),
                              pools: Optional[SimilarDaySets] = None) -> BaselineEstimate:
    """One forward and one backward pass over the whole segment."""
    weights.check_length(event.length)
    if weights.beta1 is None or weights.beta2 is None:
        raise InconsistentWeightSchedule("schedule has no one-pass weights")
    pools = select_pools(dataset, event, cfg, exclude) if pools is None else pools
    state = _Restoration(dataset, event, cfg, hp, seed, pools, _bounds_for(dataset, event, cfg))
    fwd, bwd = state.forecast(1)
    state.restored = reconcile_oneshot(fwd, bwd, weights.beta1, weights.beta2)
    state.write_counts[:] = 1
    return state.result()


def virtual_day_candidates(dataset: Dataset, event: CvrEvent, cfg: EngineConfig, exclude=()) -> list:
    """Non-CVR days in both of the event's pools, most similar first."""
    scores = score_candidates(dataset, event, cfg.similarity, exclude)
    sets = sets_from_scores(scores, cfg.similarity)
    both = set(sets.forward) & set(sets.backward)
    return rank_by_similarity(scores, both)


def derive_weights(dataset: Dataset, event: CvrEvent, K: Optional[int], cfg: EngineConfig,
                   hp: gbt.GbtHyperparams, seed: int = 0, virtual_days=None, exclude=()) -> WeightSchedule:
    """Fit the reconciliation weights on days whose true segment is known.

    The event geometry is replayed on ``K`` virtual days.  All days advance
    through the iterations together: iteration ``i``'s weights are solved
    across the days, then used to reconcile each day before iteration
    ``i + 1``.  The one-pass weights come from the first iteration.
    """
    K = cfg.n_virtual_days if K is None else K
    if virtual_days is None:
        candidates = virtual_day_candidates(dataset, event, cfg, exclude)
    else:
        candidates = list(virtual_days)
    bounds = _bounds_for(dataset, event, cfg)
    states = []
    for date in candidates:
        if len(states) == K:
            break
        vev = event.on(date)
        try:
            pools = select_pools(dataset, vev, cfg, exclude=tuple(exclude) + (event.date,))
        except InsufficientSimilarDays as err:
            log.info("skipping virtual day %s: %s", date, err)
            continue
        states.append(_Restoration(dataset, vev, cfg, hp, seed, pools, bounds))
    if len(states) < max(K, 1):
        raise InsufficientVirtualDays(f"{len(states)} usable virtual days, need {K}")

    truth = np.vstack([dataset.day(s.event.date).load[event.t_on:event.t_on + event.length] for s in states])
    L = event.length
    entries = []
    beta1 = beta2 = None
    for i in range(1, n_iterations(L) + 1):
        fc = [s.forecast(i) for s in states]
        F = np.vstack([f for f, _ in fc])
        B = np.vstack([b for _, b in fc])
        lo, hi = i - 1, L - i
        wf_first, wb_last = solve_pair(F[:, 0], B[:, 0], truth[:, lo])
        wb_first, wf_last = solve_pair(B[:, -1], F[:, -1], truth[:, hi])
        entry = WeightEntry(wf_first, wb_last, wb_first, wf_last)
        entries.append(entry)
        if i == 1:
            beta1, beta2 = solve_oneshot(F, B, truth)
        for s, (f, b) in zip(states, fc):
            s.write(i, *reconcile_step(f, b, entry))
    return WeightSchedule(
        L, entries, beta1, beta2, feeder=dataset.feeder_id, season=season_of(event.date),
        resolution=dataset.resolution.minutes,
        meta={"mode": cfg.mode.value, "virtual_days": [s.event.date.isoformat() for s in states]},
    )


__all__ = [
    "BaselineEstimate", "EngineConfig", "derive_weights", "estimate_baseline",
    "estimate_baseline_oneshot", "oneshot_from_estimate", "select_pools", "virtual_day_candidates",
]
