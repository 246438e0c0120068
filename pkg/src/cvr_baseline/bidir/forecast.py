from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .. import gbt
from ..errors import ConfigError, EmptyHistory, FeatureCountMismatch
from ..ingest import Dataset
from ..timeseries import DayKind, season_of
from .training import Direction, TargetMode, TrainingSet


@dataclass(frozen=True)
class RampBounds:
    ramp_max_up: float
    ramp_max_down: float

    def __post_init__(self):
        if not self.ramp_max_down <= 0 <= self.ramp_max_up:
            raise ConfigError(f"ramp bounds must straddle zero: ({self.ramp_max_down}, {self.ramp_max_up})")

    def clamp(self, deltas: np.ndarray) -> tuple:
        """Chronological deltas clipped to the bounds, plus the clip count."""
        out = np.clip(deltas, self.ramp_max_down, self.ramp_max_up)
        return out, int(np.count_nonzero(out != deltas))


def ramp_bounds_from_loads(loads: Sequence[np.ndarray]) -> RampBounds:
    deltas = [np.diff(np.asarray(v, dtype=float)) for v in loads if len(v) >= 2]
    if not deltas:
        raise EmptyHistory("no load history to extract ramp bounds from")
    d = np.concatenate(deltas)
    return RampBounds(max(float(d.max()), 0.0), min(float(d.min()), 0.0))


def ramp_bounds(dataset: Dataset, season: Optional[str] = None) -> RampBounds:
    """Largest up/down step changes over the non-CVR days (optionally one season)."""
    days = [
        dataset.days[d].load for d in dataset.dates_of_kind(DayKind.NON_CVR)
        if season is None or season_of(d) == season
    ]
    return ramp_bounds_from_loads(days)


@dataclass(frozen=True)
class SegmentForecast:
    """Forecast of the remaining segment in chronological order.

    Steps that were not requested are NaN.
    """

    values: np.ndarray
    clamped: int = 0


def _all_steps(training: TrainingSet, steps) -> list:
    n = training.y.shape[1]
    if steps is None:
        return list(range(n))
    return sorted({s % n for s in steps})


def predict_steps(training: TrainingSet, target_features, hp: gbt.GbtHyperparams, seed: int = 0,
                  steps=None) -> np.ndarray:
    """Raw per-step model outputs in reading order (NaN where not requested)."""
    x = np.asarray(target_features, dtype=float)
    if x.shape[0] != training.x.shape[1]:
        raise FeatureCountMismatch(f"target has {x.shape[0]} features, training {training.x.shape[1]}")
    wanted = _all_steps(training, steps)
    models = gbt.fit_many(training.x, training.y[:, wanted], hp, seed)
    raw = np.full(training.y.shape[1], np.nan)
    for step, model in zip(wanted, models):
        raw[step] = gbt.predict(model, x[None, :])[0]
    return raw


def forecast_segment_detail(training: TrainingSet, target_features, hp: gbt.GbtHyperparams, seed: int = 0, *,
                            anchor: Optional[float] = None, bounds: Optional[RampBounds] = None,
                            steps=None) -> SegmentForecast:
    """Direct multi-step forecast: one boosted ensemble per remaining step.

    In load-change mode every step is needed (levels are integrated from
    ``anchor``) and ``steps`` is ignored; deltas are clipped to ``bounds``
    when given.
    """
    change = training.mode is TargetMode.LOAD_CHANGE
    raw = predict_steps(training, target_features, hp, seed, None if change else steps)
    clamped = 0
    if change:
        if anchor is None:
            raise ConfigError("load-change forecasts need an anchor sample")
        # chronological deltas, nearest-to-anchor first
        deltas = raw if training.direction is Direction.FORWARD else -raw
        if bounds is not None:
            deltas, clamped = bounds.clamp(deltas)
        if training.direction is Direction.FORWARD:
            levels = anchor + np.cumsum(deltas)
        else:
            levels = anchor - np.cumsum(deltas)
    else:
        levels = raw
    if training.direction is Direction.BACKWARD:
        levels = levels[::-1]
    return SegmentForecast(np.ascontiguousarray(levels), clamped)


def forecast_segment(training: TrainingSet, target_features, hp: gbt.GbtHyperparams, seed: int = 0, *,
                     anchor: Optional[float] = None, bounds: Optional[RampBounds] = None,
                     steps=None) -> np.ndarray:
    return forecast_segment_detail(training, target_features, hp, seed, anchor=anchor, bounds=bounds,
                                   steps=steps).values
