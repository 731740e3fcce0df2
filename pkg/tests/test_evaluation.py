import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gridfreq.errors import ConfigurationError, InsufficientDataError
from gridfreq.evaluation import (
    SplitSpec,
    beta_grid_search,
    chronological_split,
    collect_queries,
    daily_profile_forecaster,
    evaluate,
    rmse_per_dt,
    run_forecasts,
    training_size_sweep,
    wnn_forecaster,
)
from gridfreq.patterns import build_library
from gridfreq.predictor import AdaptiveK, AdaptiveKModel
from gridfreq.synth import SynthSpec, generate, generate_feature
from gridfreq.timebase import FrequencySeries, RawFeature

from conftest import DAY, HOUR, T0, random_series
from oracles import direct_rmse, direct_wnn


def days_of(parts):
    return [len(p) / DAY for p in parts]


def test_split_ten_days():
    assert days_of(chronological_split(random_series(10))) == [7, 1, 2]


def test_split_hundred_days():
    s = FrequencySeries.from_values(np.full(100 * DAY, 50.0), T0)
    assert days_of(chronological_split(s)) == [70, 15, 15]


@given(st.integers(5, 40), st.integers(0, DAY - 1))
@settings(max_examples=15)
def test_split_contiguous_and_complete(days, extra):
    s = FrequencySeries.from_values(np.full(days * DAY + extra, 50.0), T0)
    tr, va, te = chronological_split(s)
    assert tr.start_epoch == s.start_epoch and tr.end_epoch == va.start_epoch and va.end_epoch == te.start_epoch
    assert te.end_epoch == s.end_epoch and len(tr) + len(va) + len(te) == len(s)
    assert tr.end_epoch % DAY == 0 and va.end_epoch % DAY == 0


def test_split_too_short():
    with pytest.raises(InsufficientDataError):
        chronological_split(random_series(3))


@pytest.mark.parametrize("fr", [(0.7, 0.2, 0.2), (1.0, 0.0, 0.0), (0.5, -0.1, 0.6)])
def test_split_spec_validation(fr):
    with pytest.raises(ConfigurationError):
        SplitSpec(*fr)


def test_rmse_examples():
    t = np.random.default_rng(0).normal(50, 0.1, (5, 3600))
    assert np.all(rmse_per_dt(t, t).per_dt == 0)
    np.testing.assert_allclose(rmse_per_dt(t + 0.01, t).per_dt, 0.01, rtol=1e-9)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
@settings(max_examples=15)
def test_rmse_matches_direct_accumulation(seed, n):
    rng = np.random.default_rng(seed)
    p = rng.normal(50, 0.1, (n, 3600))
    t = rng.normal(50, 0.1, (n, 3600))
    t[rng.random((n, 3600)) < 0.05] = np.nan
    r = rmse_per_dt(p, t)
    np.testing.assert_allclose(r.per_dt, direct_rmse(p.tolist(), t.tolist()), rtol=1e-12)
    perm = rng.permutation(n)
    np.testing.assert_allclose(rmse_per_dt(p[perm], t[perm]).per_dt, r.per_dt, rtol=1e-12)
    # overall equals the count-weighted mean of squared per-offset errors
    ok = r.counts > 0
    overall = np.sqrt(np.sum(r.per_dt[ok] ** 2 * r.counts[ok]) / r.counts.sum())
    assert r.overall == pytest.approx(overall, rel=1e-12)
    sq = np.nansum((p - t) ** 2, axis=0).reshape(60, 60).sum(axis=1)
    np.testing.assert_allclose(r.per_minute, np.sqrt(sq / r.counts.reshape(60, 60).sum(axis=1)), rtol=1e-12)


def test_collect_queries_skips_gapped_windows():
    v = random_series(2, seed=1).values.copy()
    v[DAY + 3 * HOUR + 10] = np.nan
    s = FrequencySeries.from_values(v, T0)
    qs, skipped = collect_queries(s, T0 + DAY, T0 + 2 * DAY)
    # the window of 04:00 and the truth of 03:00 contain the gap; only the former is skipped
    assert skipped == 1 and len(qs) == 23
    assert T0 + DAY + 4 * HOUR not in [q.hour_epoch for q in qs]


def test_leak_counter_flags_future_patterns():
    s = random_series(6, seed=2)
    full = build_library(s)  # deliberately built on everything
    _, val, _ = chronological_split(s)
    qs, _ = collect_queries(s, val.start_epoch, val.end_epoch)
    model = AdaptiveKModel(AdaptiveK.constant(3))
    _, leaks = run_forecasts({"wnn": wnn_forecaster(full, model)}, qs, val.start_epoch)
    assert leaks > 0


@pytest.fixture(scope="module")
def synth12():
    spec = SynthSpec(days=12, seed=4)
    return spec, generate(spec)


def test_evaluate_report_shape_and_leakage(synth12):
    _, s = synth12
    rep = evaluate(s, k_candidates=range(1, 8))
    assert set(rep.rmse) == {"constant", "daily_profile", "wnn"}
    assert rep.leakage_violations == 0 and rep.forecast_count == 48
    for r in rep.rmse.values():
        assert r.per_dt.shape == (3600,) and r.per_minute.shape == (60,) and np.all(r.per_dt >= 0)


def test_evaluate_thread_independent(synth12):
    _, s = synth12
    a = evaluate(s, k_candidates=range(1, 6), threads=1)
    b = evaluate(s, k_candidates=range(1, 6), threads=3)
    for name in a.rmse:
        assert np.array_equal(a.rmse[name].per_dt, b.rmse[name].per_dt)


def test_evaluate_with_feature(synth12):
    spec, s = synth12
    rep = evaluate(s, k_candidates=range(1, 6), feature=generate_feature(spec), beta=0.5)
    assert "wnn_extended" in rep.rmse and rep.leakage_violations == 0


def test_sweep_constant_series():
    s = FrequencySeries.from_values(np.full(20 * DAY, 50.01), T0)
    rows, notes, leaks = training_size_sweep(s, (7, 14), k_candidates=(1, 2))
    table = {(r.interval_days, r.predictor): r.mean_rmse_hz for r in rows}
    for d in (7, 14):
        assert table[(d, "wnn")] == pytest.approx(0, abs=1e-12)
        assert table[(d, "daily_profile")] == pytest.approx(0, abs=1e-12)
        assert table[(d, "constant")] == pytest.approx(0.01, rel=1e-9)
    assert leaks == 0 and not notes


def test_sweep_notes_for_bad_intervals():
    rows, notes, _ = training_size_sweep(random_series(5), (1, 4, 9), k_candidates=(1,))
    assert {r.interval_days for r in rows} == {4}
    assert len(notes) == 2


def test_sweep_matches_naive_rerun():
    """Single interval, k fixed to 1: rebuild every number from the oracles."""
    s = generate(SynthSpec(days=8, seed=9))
    rows, _, _ = training_size_sweep(s, (8,), k_candidates=(1,))
    table = {r.predictor: r.mean_rmse_hz for r in rows}
    b = T0 + 6 * DAY  # floor(0.8 * 8 d) snapped to midnight
    train = s.segment(T0, b)
    lib = build_library(train)
    qs, _ = collect_queries(s, b, s.end_epoch)
    preds_w, preds_d, truths = [], [], []
    for q in qs:
        bk = lib.bucket(q.hour_of_day)
        preds_w.append(direct_wnn(bk.windows, bk.targets, bk.days, q.window, 1, (q.day_index,)))
        preds_d.append(bk.targets.mean(axis=0))
        truths.append(q.next_hour)
    pooled = lambda p: np.sqrt(np.mean((np.array(p) - np.array(truths)) ** 2))
    assert table["wnn"] == pytest.approx(pooled(preds_w), rel=1e-12)
    assert table["daily_profile"] == pytest.approx(pooled(preds_d), rel=1e-12)
    assert table["constant"] == pytest.approx(pooled([np.full(3600, 50.0)] * len(qs)), rel=1e-12)


def test_sweep_whole_series_matches_direct_split():
    s = generate(SynthSpec(days=10, seed=2))
    rows, _, _ = training_size_sweep(s, (10,), k_candidates=(1, 2, 3))
    table = {r.predictor: r.mean_rmse_hz for r in rows}
    b = T0 + 8 * DAY
    lib = build_library(s.segment(T0, b))
    qs, _ = collect_queries(s, b, s.end_epoch)
    rmse, _ = run_forecasts({"dp": daily_profile_forecaster(lib)}, qs, b)
    assert table["daily_profile"] == rmse["dp"].overall


def test_beta_search_uninformative_periodic_feature():
    s = generate(SynthSpec(days=10, seed=1))
    # feature repeats every day, so every candidate window equals the query's
    n = 10 * 144
    raw = RawFeature(T0, 600, np.sin(np.arange(n) * 2 * np.pi / 144) + 2.0)
    res = beta_grid_search(s, raw, (0.3, 0.6, 0.9), k_candidates=range(1, 5))
    assert np.all(res.validation_rmse == res.plain_validation_rmse)
    assert res.best_beta == 0.3 and res.leakage_violations == 0


def test_beta_search_informative_feature_not_worse():
    # with only ~2 weeks of training days the feature cannot pay off yet, so use a month
    spec = SynthSpec(days=30, seed=3)
    res = beta_grid_search(generate(spec), generate_feature(spec), (0.5, 1.0, 1.5))
    assert res.validation_rmse.min() <= res.plain_validation_rmse
    assert res.leakage_violations == 0


def test_beta_search_rejects_empty_grid(synth12):
    spec, s = synth12
    with pytest.raises(ConfigurationError):
        beta_grid_search(s, generate_feature(spec), ())
