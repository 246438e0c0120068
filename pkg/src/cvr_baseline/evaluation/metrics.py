"""Estimation-quality metrics over a set of test days.

MAPE, nRMSE and energy error are ratios; MPE is in percent.  Each is
computed per day and then averaged over days.  MPE is signed so that
under-prediction (``predicted < actual``) is positive.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyInput, LengthMismatch, ZeroActual


@dataclass(frozen=True)
class DayMetrics:
    mape: float
    nrmse: float
    energy_error: float
    mpe: float

    def as_dict(self) -> dict:
        return {"mape": self.mape, "nrmse": self.nrmse, "energy_error": self.energy_error, "mpe": self.mpe}


@dataclass(frozen=True)
class MetricReport:
    mape: float
    nrmse: float
    energy_error: float
    mpe: float
    per_day: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"mape": self.mape, "nrmse": self.nrmse, "energy_error": self.energy_error, "mpe": self.mpe}


UNITS = {"mape": "ratio", "nrmse": "ratio", "energy_error": "ratio", "mpe": "percent"}


def day_metrics(actual, predicted) -> DayMetrics:
    y = np.asarray(actual, dtype=float)
    yhat = np.asarray(predicted, dtype=float)
    if y.ndim != 1 or y.shape != yhat.shape:
        raise LengthMismatch(f"actual {y.shape} vs predicted {yhat.shape}")
    if y.size == 0:
        raise EmptyInput("empty day")
    if np.any(y == 0):
        raise ZeroActual("actual series contains zeros")
    err = y - yhat
    return DayMetrics(
        mape=float(np.mean(np.abs(err / y))),
        nrmse=float(np.sqrt(np.mean(err ** 2)) / np.mean(y)),
        energy_error=float(np.sum(np.abs(err)) / np.sum(y)),
        mpe=float(100.0 * np.mean(err / y)),
    )


def metrics(actual, predicted) -> MetricReport:
    """Average the per-day metrics of paired day vectors."""
    actual = list(actual)
    predicted = list(predicted)
    if not actual:
        raise EmptyInput("no test days")
    if len(actual) != len(predicted):
        raise LengthMismatch(f"{len(actual)} actual days vs {len(predicted)} predicted")
    days = [day_metrics(a, p) for a, p in zip(actual, predicted)]
    return MetricReport(
        mape=float(np.mean([d.mape for d in days])),
        nrmse=float(np.mean([d.nrmse for d in days])),
        energy_error=float(np.mean([d.energy_error for d in days])),
        mpe=float(np.mean([d.mpe for d in days])),
        per_day=days,
    )
