import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvr_baseline import bidir, gbt
from cvr_baseline.errors import EmptyInput, LengthMismatch, MissingChannel, ZeroActual, ZeroVoltageDelta
from cvr_baseline.evaluation import (EvalProtocol, aggregate_cvr_report, cvr_factor, edge_error_shares,
                                     event_voltages, metrics, run_virtual_evaluation)
from cvr_baseline.evaluation.cvr import CvrResult, voltage_levels
from cvr_baseline.evaluation.harness import choose_days
from cvr_baseline.similar import SimilarityConfig
from cvr_baseline.synth import SynthConfig, generate, noiseless
from cvr_baseline.timeseries import CvrEvent, Window

from conftest import make_day


def test_perfect_prediction():
    r = metrics([[5.0, 6.0]], [[5.0, 6.0]])
    assert (r.mape, r.nrmse, r.energy_error, r.mpe) == (0, 0, 0, 0)


def test_two_point_fixture():
    r = metrics([[10.0, 10.0]], [[9.0, 11.0]])
    assert r.mape == pytest.approx(0.1, abs=1e-12)
    assert r.nrmse == pytest.approx(0.1, abs=1e-12)
    assert r.energy_error == pytest.approx(0.1, abs=1e-12)
    assert r.mpe == pytest.approx(0.0, abs=1e-12)


def test_nrmse_averaged_over_days():
    r = metrics([[10.0, 10.0], [10.0, 10.0]], [[9.0, 11.0], [7.0, 13.0]])
    assert [d.nrmse for d in r.per_day] == pytest.approx([0.1, 0.3])
    assert r.nrmse == pytest.approx(0.2, abs=1e-12)


def test_mape_is_mean_over_steps():
    r = metrics([[10.0, 20.0, 40.0]], [[11.0, 20.0, 30.0]])
    assert r.mape == pytest.approx((0.1 + 0 + 0.25) / 3, abs=1e-12)
    assert r.mpe == pytest.approx(100 * (-0.1 + 0 + 0.25) / 3, abs=1e-12)
    assert r.energy_error == pytest.approx(11 / 70, abs=1e-12)


def test_under_prediction_is_positive_mpe():
    assert metrics([[10.0, 10.0]], [[9.0, 9.5]]).mpe > 0
    assert metrics([[10.0, 10.0]], [[11.0, 10.5]]).mpe < 0


def test_metric_errors():
    with pytest.raises(LengthMismatch):
        metrics([[1.0, 2.0]], [[1.0]])
    with pytest.raises(LengthMismatch):
        metrics([[1.0]], [[1.0], [2.0]])
    with pytest.raises(ZeroActual):
        metrics([[0.0, 1.0]], [[0.0, 1.0]])
    with pytest.raises(EmptyInput):
        metrics([], [])


day_vectors = st.lists(st.floats(1.0, 1e4), min_size=1, max_size=20)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(day_vectors, st.integers(0, 2 ** 32 - 1)), min_size=1, max_size=5),
       st.floats(1e-3, 1e3))
def test_metrics_scale_invariant(days, c):
    actual = [np.array(a) for a, _ in days]
    pred = [a * np.random.default_rng(s).uniform(0.5, 1.5, a.size) for a, (_, s) in zip(actual, days)]
    base = metrics(actual, pred)
    scaled = metrics([c * a for a in actual], [c * p for p in pred])
    for name in ("mape", "nrmse", "energy_error", "mpe"):
        assert getattr(scaled, name) == pytest.approx(getattr(base, name), rel=1e-9, abs=1e-12)
    assert base.mape >= 0 and base.nrmse >= 0 and base.energy_error >= 0


@settings(max_examples=50, deadline=None)
@given(st.floats(1.0, 1e4), st.lists(st.floats(0.0, 2e4), min_size=1, max_size=20))
def test_energy_error_equals_mape_for_constant_actual(level, pred):
    actual = np.full(len(pred), level)
    r = metrics([actual], [np.array(pred)])
    assert r.energy_error == pytest.approx(r.mape, rel=1e-12, abs=1e-15)


def test_cvr_factor_examples():
    b = np.array([100.0, 100.0])
    assert cvr_factor(b, b, 1.0, 0.97).cvr_factor == 0
    assert cvr_factor(b, b * 0.97, 1.0, 0.97).cvr_factor == pytest.approx(1.0)
    r = cvr_factor([100.0], [98.0], 1.0, 0.97)
    assert r.cvr_factor == pytest.approx(2 / 3)
    assert r.delta_p_pct == pytest.approx(2.0) and r.delta_v_pct == pytest.approx(3.0)
    assert r.cvr_factor == pytest.approx(r.delta_p_pct / r.delta_v_pct)


def test_per_step_factors_use_event_voltage():
    r = cvr_factor([100.0, 100.0], [99.0, 97.0], 1.0, 0.98)
    assert r.per_step_factors == pytest.approx([0.5, 1.5])
    assert r.cvr_factor == pytest.approx(np.mean(r.per_step_factors))


def test_cvr_factor_errors():
    with pytest.raises(ZeroVoltageDelta):
        cvr_factor([100.0], [98.0], 1.0, 1.0)
    with pytest.raises(LengthMismatch):
        cvr_factor([100.0], [98.0, 1.0], 1.0, 0.97)


def test_voltage_levels():
    volt = np.ones(24)
    volt[15:18] = 0.97
    day = make_day(load=np.full(24, 10.0), voltage=volt)
    ev = CvrEvent(day.date, Window(15, 3), 4)
    assert voltage_levels(day, ev) == pytest.approx((1.0, 0.97))
    assert event_voltages(day, ev) == pytest.approx((1.0, 0.97))
    assert event_voltages(make_day(), CvrEvent(day.date, Window(15, 3), 4, 2.0)) == (1.0, 0.98)
    with pytest.raises(MissingChannel):
        event_voltages(make_day(), ev)


def result(value, season="summer", feeder="a"):
    return CvrResult(value, value * 3, 3.0, np.array([value]), season, feeder)


def test_aggregate_examples():
    (row,) = aggregate_cvr_report([result(0.7)])
    assert row["mean"] == row["ci_low"] == row["ci_high"] == 0.7 and row["n"] == 1
    (row,) = aggregate_cvr_report([result(0.4), result(0.6)])
    assert row["mean"] == pytest.approx(0.5)
    half = 1.96 * np.std([0.4, 0.6], ddof=1) / np.sqrt(2)
    assert (row["ci_low"], row["ci_high"]) == pytest.approx((0.5 - half, 0.5 + half))
    rows = aggregate_cvr_report([result(0.4), result(0.6, "winter"), result(0.5, feeder="b")])
    assert [(r["season"], r["feeder_id"]) for r in rows] == [("summer", "a"), ("summer", "b"), ("winter", "a")]
    with pytest.raises(EmptyInput):
        aggregate_cvr_report([])


def test_cvr_result_round_trip():
    r = cvr_factor([100.0, 50.0], [98.0, 49.0], 1.0, 0.97, "summer", "f", "2023-07-01")
    again = CvrResult.from_dict(r.to_dict())
    assert again.to_dict() == r.to_dict()


HP = gbt.GbtHyperparams(learning_rate=0.3, n_estimators=20, max_depth=3)
ENGINE = bidir.EngineConfig(similarity=SimilarityConfig(0.3, 0.3, 5, 2), relax_retries=3)


def test_injected_feeders_separate():
    rows = []
    for i, factor in enumerate((0.3, 0.8)):
        cfg = SynthConfig(seed=i, days=80, start="2023-06-01", resolution=60, n_events=4,
                          injected_cvr_factor=factor, feeder_id=f"f{factor}", noise_sd=5.0)
        ds = generate(cfg)
        ws = bidir.derive_weights(ds, ds.events[0], 5, ENGINE, HP)
        for ev in ds.events:
            est = bidir.estimate_baseline(ds, ev, ENGINE, HP, ws)
            day = ds.day(ev.date)
            rows.append(cvr_factor(est.restored, day.load[ev.t_on:ev.t_off + 1], *event_voltages(day, ev),
                                   season="summer", feeder_id=ds.feeder_id))
    report = {r["feeder_id"]: r["mean"] for r in aggregate_cvr_report(rows)}
    assert report["f0.8"] - report["f0.3"] >= 0.3


def test_noiseless_virtual_evaluation():
    ds = generate(noiseless(SynthConfig(seed=2, days=60, start="2023-06-01", resolution=60)))
    res = run_virtual_evaluation(ds, EvalProtocol(count=1, n_weight_days=4), ENGINE, HP)
    assert set(res.reports) == {"forward", "backward", "reconciled", "oneshot", "dP", "P"}
    for rep in res.reports.values():
        assert rep.nrmse < 1e-9
    assert set(edge_error_shares(res)) == {"forward", "backward"}
    s = res.summary()
    assert s["days"] == [res.days[0].isoformat()] and s["nrmse_std"]["P"] == 0.0


def test_evaluation_days_excluded_from_weights():
    ds = generate(SynthConfig(seed=2, days=100, start="2023-05-01", resolution=60))
    days, weight_days = choose_days(ds, EvalProtocol(count=10, n_weight_days=5))
    assert len(days) == 10 and not set(days) & set(weight_days)
    assert all(d.month in (6, 7, 8) for d in days + weight_days)
    assert days == sorted(days) and days[0] == dt.date(2023, 6, 1)
