"""Hybrid temperature + load similar-day screening.

Four sets are built around the event window ``[t_on, t_off]`` with a match
window of ``W`` samples:

* ``pre_T``  - temperature over ``[t_on - W, t_off]`` (threshold ``eps_f``)
* ``pre_P``  - load over ``[t_on - W, t_on - 1]``     (threshold ``eps_f``)
* ``post_T`` - temperature over ``[t_on, t_off + W]`` (threshold ``eps_b``)
* ``post_P`` - load over ``[t_off + 1, t_off + W]``   (threshold ``eps_b``)

The forward training pool is ``pre_T & pre_P``, the backward pool
``post_T & post_P``.  Thresholds are nRMSE ratios, not percent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InsufficientSimilarDays, LengthMismatch, ZeroMeanTarget
from .ingest import Dataset
from .timeseries import CvrEvent, DayKind, DayRecord


@dataclass(frozen=True)
class SimilarityConfig:
    eps_f: float = 1.0
    eps_b: float = 1.0
    eps_sim: int = 5
    context_len: int = 24

    def __post_init__(self):
        if not (self.eps_f > 0 and self.eps_b > 0):
            raise ConfigError("eps_f and eps_b must be positive")
        if self.eps_sim < 1:
            raise ConfigError("eps_sim must be at least 1")
        if self.context_len < 1:
            raise ConfigError("context_len must be positive")

    def scaled(self, factor: float) -> "SimilarityConfig":
        return SimilarityConfig(self.eps_f * factor, self.eps_b * factor, self.eps_sim, self.context_len)


@dataclass(frozen=True)
class SimilarDaySets:
    pre_T: tuple
    pre_P: tuple
    post_T: tuple
    post_P: tuple

    @property
    def forward(self) -> tuple:
        keep = set(self.pre_P)
        return tuple(d for d in self.pre_T if d in keep)

    @property
    def backward(self) -> tuple:
        keep = set(self.post_P)
        return tuple(d for d in self.post_T if d in keep)


def segment_nrmse(target, candidate) -> float:
    """RMSE between two segments over the target's mean.

    The denominator is ``|mean(target)|`` so that temperature segments below
    zero degrees do not produce negative scores.
    """
    target = np.asarray(target, dtype=float)
    candidate = np.asarray(candidate, dtype=float)
    if target.shape != candidate.shape or target.size == 0:
        raise LengthMismatch(f"segments of length {target.size} and {candidate.size}")
    mean = target.mean()
    if mean == 0:
        raise ZeroMeanTarget("target segment has zero mean")
    return float(np.sqrt(np.mean((target - candidate) ** 2)) / abs(mean))


def match_segments(event: CvrEvent, w: int) -> dict:
    """Index ranges (python slices) of the four comparison segments."""
    t_on, t_off = event.t_on, event.t_off
    return {
        "pre_T": ("temperature", slice(t_on - w, t_off + 1)),
        "pre_P": ("load", slice(t_on - w, t_on)),
        "post_T": ("temperature", slice(t_on, t_off + 1 + w)),
        "post_P": ("load", slice(t_off + 1, t_off + 1 + w)),
    }


def candidate_pool(dataset: Dataset, exclude=()) -> list:
    excluded = set(exclude)
    return [d for d in dataset.dates_of_kind(DayKind.NON_CVR) if d not in excluded]


def segment_scores(target: DayRecord, candidate: DayRecord, event: CvrEvent, w: int) -> dict:
    scores = {}
    for name, (channel, sl) in match_segments(event, w).items():
        scores[name] = segment_nrmse(getattr(target, channel)[sl], getattr(candidate, channel)[sl])
    return scores


def score_candidates(dataset: Dataset, event: CvrEvent, cfg: SimilarityConfig, exclude=()) -> dict:
    """``{date: {set_name: nRMSE}}`` for every candidate day."""
    event.validate(dataset.resolution.samples_per_day, cfg.context_len)
    target = dataset.day(event.date)
    return {
        d: segment_scores(target, dataset.days[d], event, cfg.context_len)
        for d in candidate_pool(dataset, exclude=tuple(exclude) + (event.date,))
    }


def sets_from_scores(scores: dict, cfg: SimilarityConfig) -> SimilarDaySets:
    thresholds = {"pre_T": cfg.eps_f, "pre_P": cfg.eps_f, "post_T": cfg.eps_b, "post_P": cfg.eps_b}
    members = {name: [] for name in thresholds}
    for date in sorted(scores):
        for name, eps in thresholds.items():
            if scores[date][name] < eps:
                members[name].append(date)
    return SimilarDaySets(**{k: tuple(v) for k, v in members.items()})


def select_similar_days(dataset: Dataset, event: CvrEvent, cfg: SimilarityConfig,
                        exclude=(), check: bool = True) -> SimilarDaySets:
    """Screen the non-CVR, non-holiday days against ``event``'s day.

    Raises :class:`InsufficientSimilarDays` when either training pool has
    fewer than ``cfg.eps_sim`` members (unless ``check`` is False).
    """
    sets = sets_from_scores(score_candidates(dataset, event, cfg, exclude), cfg)
    if check:
        check_pools(sets, cfg)
    return sets


def check_pools(sets: SimilarDaySets, cfg: SimilarityConfig) -> None:
    for direction, pool in (("forward", sets.forward), ("backward", sets.backward)):
        if len(pool) < cfg.eps_sim:
            raise InsufficientSimilarDays(direction, len(pool), cfg.eps_sim)


def rank_by_similarity(scores: dict, dates=None) -> list:
    """Dates ordered by the sum of their four nRMSE scores (ties by date)."""
    dates = scores if dates is None else dates
    return sorted(dates, key=lambda d: (sum(scores[d].values()), d))

