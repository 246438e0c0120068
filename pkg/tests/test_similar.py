import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvr_baseline.errors import ConfigError, InsufficientSimilarDays, LengthMismatch, ZeroMeanTarget
from cvr_baseline.similar import SimilarityConfig, match_segments, segment_nrmse, select_similar_days
from cvr_baseline.timeseries import CvrEvent, DayKind, Window

from conftest import make_dataset, make_day

T = dt.date(2023, 7, 10)
EVENT = CvrEvent(T, Window(15, 3), context_len=4)
CFG = SimilarityConfig(eps_f=1.0, eps_b=1.0, eps_sim=1, context_len=4)


def dates(n):
    return [T - dt.timedelta(days=k) for k in range(1, n + 1)]


def test_nrmse_examples():
    assert segment_nrmse([2, 2, 2, 2], [2, 2, 2, 2]) == 0
    assert segment_nrmse([1, 3], [2, 2]) == pytest.approx(0.5)


def test_nrmse_errors():
    with pytest.raises(ZeroMeanTarget):
        segment_nrmse([1, -1], [0, 0])
    with pytest.raises(LengthMismatch):
        segment_nrmse([1, 2], [1, 2, 3])


def test_nrmse_negative_mean_uses_magnitude():
    assert segment_nrmse([-2, -2], [-1, -1]) == pytest.approx(0.5)


def test_config_validation():
    with pytest.raises(ConfigError):
        SimilarityConfig(eps_f=0)
    with pytest.raises(ConfigError):
        SimilarityConfig(eps_sim=0)


def test_identical_candidate_in_all_sets():
    ds = make_dataset([make_day(T, kind=DayKind.CVR), make_day(dates(1)[0])])
    sets = select_similar_days(ds, EVENT, CFG)
    for name in ("pre_T", "pre_P", "post_T", "post_P"):
        assert getattr(sets, name) == (dates(1)[0],)


def test_scaled_load_excluded():
    # triple load with the same shape: nRMSE = 2 on a flat target
    ds = make_dataset([make_day(T, load=1.0), make_day(dates(1)[0], load=3.0)])
    sets = select_similar_days(ds, EVENT, CFG, check=False)
    assert sets.pre_P == () and sets.post_P == ()
    assert sets.pre_T == (dates(1)[0],)
    assert segment_nrmse([1, 1, 1], [3, 3, 3]) == pytest.approx(2.0)


def test_too_few_similar_days():
    days = [make_day(T)] + [make_day(d) for d in dates(4)]
    ds = make_dataset(days)
    with pytest.raises(InsufficientSimilarDays) as info:
        select_similar_days(ds, EVENT, SimilarityConfig(eps_sim=5, context_len=4))
    assert (info.value.found, info.value.required) == (4, 5)


def test_only_non_cvr_days_and_not_self():
    days = [make_day(T), make_day(dates(1)[0], kind=DayKind.CVR), make_day(dates(2)[0], kind=DayKind.HOLIDAY),
            make_day(dates(3)[0], kind=DayKind.VIRTUAL_CVR), make_day(dates(4)[0])]
    sets = select_similar_days(make_dataset(days), EVENT, CFG)
    assert sets.forward == sets.backward == (dates(4)[0],)


def test_window_lengths():
    segs = match_segments(EVENT, 4)
    lengths = {k: sl.stop - sl.start for k, (_, sl) in segs.items()}
    assert lengths == {"pre_T": 4 + 3, "pre_P": 4, "post_T": 3 + 4, "post_P": 4}


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(0.01, 0.5), st.floats(1.0, 3.0))
def test_monotone_in_thresholds(seed, eps, factor):
    rng = np.random.default_rng(seed)
    days = [make_day(T, load=100 + rng.normal(0, 10, 24), temp=25 + rng.normal(0, 3, 24))]
    days += [make_day(d, load=100 + rng.normal(0, 10, 24), temp=25 + rng.normal(0, 3, 24)) for d in dates(12)]
    ds = make_dataset(days)
    small = select_similar_days(ds, EVENT, SimilarityConfig(eps, eps, 1, 4), check=False)
    big = select_similar_days(ds, EVENT, SimilarityConfig(eps * factor, eps * factor, 1, 4), check=False)
    for name in ("pre_T", "pre_P", "post_T", "post_P"):
        assert set(getattr(small, name)) <= set(getattr(big, name))
    assert T not in big.pre_T + big.post_T
