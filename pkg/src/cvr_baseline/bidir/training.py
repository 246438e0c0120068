"""Training rows for the forward and backward passes.

Geometry at iteration ``i`` (1-based) of an event with ``L`` samples starting
at ``t_on``: the remaining segment is ``[t_on + i - 1, t_on + L - i]``
(``L_i = L - 2(i - 1)`` samples).  The forward context is the ``W`` samples
just before it, the backward context the ``W`` samples just after it.

Feature layout (reading order; the backward pass reads right to left)::

    load over the context window            W
    load change over the context window     W - 1
    temperature over the context window     W
    temperature over the remaining segment  L_i
    hour of day of the first remaining sample  1

Load changes are taken against the previous sample in reading order, so the
backward pass uses ``P(t) - P(t + 1)``.  Targets are loads at the remaining
samples, or their changes in the same convention, in reading order.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..errors import PoolTooSmall, WindowDoesNotFit
from ..ingest import Dataset
from ..timeseries import CvrEvent


class TargetMode(enum.Enum):
    LOAD_LEVEL = "P"
    LOAD_CHANGE = "dP"


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class Geometry:
    """Index arithmetic for one iteration (absolute day sample indices)."""

    t_on: int
    length: int
    iteration: int
    context_len: int

    @property
    def start(self) -> int:
        return self.t_on + self.iteration - 1

    @property
    def stop(self) -> int:
        return self.t_on + self.length - self.iteration + 1

    @property
    def remaining(self) -> int:
        return self.stop - self.start

    def window(self, direction: Direction) -> slice:
        if direction is Direction.FORWARD:
            return slice(self.start - self.context_len, self.start)
        return slice(self.stop, self.stop + self.context_len)

    def anchor_index(self, direction: Direction) -> int:
        return self.start - 1 if direction is Direction.FORWARD else self.stop

    def n_features(self) -> int:
        return 3 * self.context_len - 1 + self.remaining + 1


def geometry(event: CvrEvent, iteration: int, context_len: int) -> Geometry:
    g = Geometry(event.t_on, event.length, iteration, context_len)
    if iteration < 1 or g.remaining < 1:
        raise ValueError(f"iteration {iteration} leaves no remaining samples for L={event.length}")
    return g


def n_iterations(length: int) -> int:
    return (length + 1) // 2


def _reading(values: np.ndarray, direction: Direction) -> np.ndarray:
    return values if direction is Direction.FORWARD else values[::-1]


def feature_row(load: np.ndarray, temperature: np.ndarray, g: Geometry, direction: Direction,
                minutes_per_sample: int) -> np.ndarray:
    win = g.window(direction)
    if win.start < 0 or win.stop > load.shape[0]:
        raise WindowDoesNotFit(f"{direction.value} context window [{win.start}, {win.stop}) leaves the day")
    ctx_load = _reading(load[win], direction)
    ctx_temp = _reading(temperature[win], direction)
    seg_temp = _reading(temperature[g.start:g.stop], direction)
    first = g.start if direction is Direction.FORWARD else g.stop - 1
    hour = first * minutes_per_sample / 60.0
    return np.concatenate((ctx_load, np.diff(ctx_load), ctx_temp, seg_temp, [hour]))


def target_row(load: np.ndarray, g: Geometry, direction: Direction, mode: TargetMode) -> np.ndarray:
    seg = _reading(load[g.start:g.stop], direction)
    if mode is TargetMode.LOAD_LEVEL:
        return seg.copy()
    anchor = load[g.anchor_index(direction)]
    return np.diff(np.concatenate(([anchor], seg)))


@dataclass(frozen=True)
class TrainingSet:
    direction: Direction
    mode: TargetMode
    geometry: Geometry
    x: np.ndarray
    y: np.ndarray
    day_ids: tuple

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]


def build_training_set(dataset: Dataset, event: CvrEvent, pool, direction: Direction, mode: TargetMode,
                       iteration: int, context_len: int = None, min_days: int = 1) -> TrainingSet:
    """Rows from every pool day, with the event's window geometry."""
    context_len = event.context_len if context_len is None else context_len
    pool = tuple(sorted(pool))
    if len(pool) < max(min_days, 1):
        raise PoolTooSmall(f"{direction.value} pool has {len(pool)} days, need {max(min_days, 1)}")
    g = geometry(event, iteration, context_len)
    minutes = dataset.resolution.minutes
    xs, ys = [], []
    for date in pool:
        day = dataset.day(date)
        xs.append(feature_row(day.load, day.temperature, g, direction, minutes))
        ys.append(target_row(day.load, g, direction, mode))
    return TrainingSet(direction, mode, g, np.vstack(xs), np.vstack(ys), pool)
