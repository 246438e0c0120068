"""Reconciliation weights and the per-iteration combination rule.

All forecast vectors handled here are in chronological order.  In the
iteration-``i`` entry, ``wf_first``/``wb_last`` weight the forward and
backward forecasts at the leftmost remaining sample (the backward pass's
last step), and ``wb_first``/``wf_last`` weight them at the rightmost one.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import InconsistentWeightSchedule
from .training import n_iterations

log = logging.getLogger(__name__)

# singular values below this fraction of the largest are treated as zero
RCOND = 1e-10


@dataclass(frozen=True)
class WeightEntry:
    wf_first: float
    wb_last: float
    wb_first: float
    wf_last: float

    def as_dict(self) -> dict:
        return {"wf_first": self.wf_first, "wb_last": self.wb_last,
                "wb_first": self.wb_first, "wf_last": self.wf_last}


FORWARD_ONLY = WeightEntry(1.0, 0.0, 0.0, 1.0)


@dataclass
class WeightSchedule:
    length: int
    entries: list
    beta1: Optional[np.ndarray] = None
    # indexed by backward step: beta2[0] weighs the sample next to the post window
    beta2: Optional[np.ndarray] = None
    feeder: str = ""
    season: str = ""
    resolution: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.entries) != n_iterations(self.length):
            raise InconsistentWeightSchedule(
                f"{len(self.entries)} entries for L={self.length}, expected {n_iterations(self.length)}")
        vals = [v for e in self.entries for v in e.as_dict().values()]
        if not np.all(np.isfinite(vals)):
            raise InconsistentWeightSchedule("weights must be finite")
        for name in ("beta1", "beta2"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float)
                if arr.shape != (self.length,):
                    raise InconsistentWeightSchedule(f"{name} must have {self.length} entries")
                setattr(self, name, arr)

    def check_length(self, length: int) -> None:
        if length != self.length:
            raise InconsistentWeightSchedule(f"schedule is for L={self.length}, event has L={length}")

    @classmethod
    def constant(cls, length: int, entry: WeightEntry = FORWARD_ONLY, **kw) -> "WeightSchedule":
        return cls(length, [entry] * n_iterations(length), **kw)

    def to_dict(self) -> dict:
        return {
            "feeder": self.feeder,
            "season": self.season,
            "resolution": self.resolution,
            "L": self.length,
            "entries": [e.as_dict() for e in self.entries],
            "beta1": None if self.beta1 is None else self.beta1.tolist(),
            "beta2": None if self.beta2 is None else self.beta2.tolist(),
            **({"meta": self.meta} if self.meta else {}),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WeightSchedule":
        return cls(
            length=int(d["L"]),
            entries=[WeightEntry(**e) for e in d["entries"]],
            beta1=None if d.get("beta1") is None else np.asarray(d["beta1"], dtype=float),
            beta2=None if d.get("beta2") is None else np.asarray(d["beta2"], dtype=float),
            feeder=d.get("feeder", ""),
            season=d.get("season", ""),
            resolution=int(d.get("resolution", 0)),
            meta=d.get("meta", {}),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "WeightSchedule":
        return cls.from_dict(json.loads(Path(path).read_text()))


def solve_pair(first, second, target) -> tuple:
    """Zero-intercept least squares ``target ~ a * first + b * second``.

    Collinear or all-zero regressors get the minimum-norm solution.
    """
    A = np.column_stack((np.asarray(first, dtype=float), np.asarray(second, dtype=float)))
    y = np.asarray(target, dtype=float)
    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=RCOND)
    if rank < 2:
        log.debug("rank-deficient weight system (rank %d); using minimum-norm solution", rank)
    return float(coef[0]), float(coef[1])


def reconcile_step(fwd, bwd, w: WeightEntry) -> tuple:
    """Combine the endpoint forecasts of one iteration.

    ``fwd`` and ``bwd`` are the chronological forecasts of the remaining
    segment.  Returns ``(left, right)``; for a single remaining sample both
    are the same value, with the two weights rescaled to sum to one when
    their sum is nonzero.
    """
    fwd = np.asarray(fwd, dtype=float)
    bwd = np.asarray(bwd, dtype=float)
    if fwd.shape[0] == 1:
        total = w.wf_first + w.wb_last
        a, b = (w.wf_first / total, w.wb_last / total) if total != 0 else (w.wf_first, w.wb_last)
        v = a * fwd[0] + b * bwd[0]
        return v, v
    left = w.wf_first * fwd[0] + w.wb_last * bwd[0]
    right = w.wb_first * bwd[-1] + w.wf_last * fwd[-1]
    return left, right


def reconcile_oneshot(fwd, bwd, beta1, beta2) -> np.ndarray:
    """Per-index combination of full-length chronological forecasts."""
    fwd = np.asarray(fwd, dtype=float)
    bwd = np.asarray(bwd, dtype=float)
    return np.asarray(beta1) * fwd + np.asarray(beta2)[::-1] * bwd


def solve_oneshot(F, B, GT) -> tuple:
    """Per-index weights from ``K x L`` chronological forecast matrices."""
    F, B, GT = (np.atleast_2d(np.asarray(a, dtype=float)) for a in (F, B, GT))
    L = GT.shape[1]
    beta1 = np.empty(L)
    beta2 = np.empty(L)
    for j in range(L):
        beta1[j], beta2[L - 1 - j] = solve_pair(F[:, j], B[:, j], GT[:, j])
    return beta1, beta2
