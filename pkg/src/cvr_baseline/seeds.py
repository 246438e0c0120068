"""Stable sub-seed derivation.

Every random stream is seeded from ``sha256("<seed>|<stage>|<date>")`` so
results do not depend on the order in which days or stages are processed.
"""
from __future__ import annotations

import datetime as dt
import hashlib
from typing import Optional

import numpy as np


def sub_seed(seed: int, stage: str, date: Optional[dt.date] = None) -> int:
    key = f"{int(seed)}|{stage}|{'' if date is None else date.isoformat()}"
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "little") >> 1


def rng_for(seed: int, stage: str, date: Optional[dt.date] = None) -> np.random.Generator:
    return np.random.default_rng(sub_seed(seed, stage, date))
