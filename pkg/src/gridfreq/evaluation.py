"""Chronological backtesting: splits, per-offset RMSE, training-size sweeps."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, EmptyDataError, InsufficientDataError
from .features import (
    DEFAULT_BETAS,
    DistanceCache,
    FeatureSeries,
    block_average,
    build_feature_library,
    extended_forecaster,
    extended_ranker,
    has_feature_window,
    minmax_scale,
)
from .patterns import GAMMA, Pattern, PatternLibrary, build_library, find_neighbours, query_pattern
from .predictor import (
    AdaptiveKModel,
    combine,
    fit_adaptive_k_model,
    predict_constant,
)
from .timebase import SECONDS_PER_DAY, FrequencySeries, RawFeature

PREDICTORS = ("constant", "daily_profile", "wnn")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.70
    validation_fraction: float = 0.15
    test_fraction: float = 0.15

    def __post_init__(self):
        fracs = (self.train_fraction, self.validation_fraction, self.test_fraction)
        if any(not 0 < f < 1 for f in fracs):
            raise ConfigurationError("split fractions must lie in (0, 1)")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ConfigurationError("split fractions must sum to 1")


def _snap_midnight(epoch: int) -> int:
    return epoch - epoch % SECONDS_PER_DAY


def _boundary(series: FrequencySeries, fraction: float) -> int:
    # tiny slack so that e.g. 0.7 * 864000 lands on 604800, not one second short
    return _snap_midnight(series.start_epoch + int(math.floor(fraction * len(series) + 1e-6)))


def chronological_split(
    series: FrequencySeries, spec: SplitSpec = SplitSpec()
) -> tuple[FrequencySeries, FrequencySeries, FrequencySeries]:
    """Cut into train/validation/test at midnight UTC boundaries (both rounded down).

    Training must cover at least 2 days (the pattern library minimum);
    validation and test at least one day each.
    """
    b1 = _boundary(series, spec.train_fraction)
    b2 = _boundary(series, spec.train_fraction + spec.validation_fraction)
    if b1 - series.start_epoch < 2 * SECONDS_PER_DAY:
        raise InsufficientDataError("training split shorter than 2 days")
    if b2 - b1 < SECONDS_PER_DAY or series.end_epoch - b2 < SECONDS_PER_DAY:
        raise InsufficientDataError("validation and test splits need at least one day each")
    return (
        series.segment(series.start_epoch, b1),
        series.segment(b1, b2),
        series.segment(b2, series.end_epoch),
    )


def collect_queries(series: FrequencySeries, lo: int, hi: int) -> tuple[list[Pattern], int]:
    """Queries whose predicted hour lies in ``[lo, hi)``.

    The observed hour may precede ``lo``. Queries with a gapped window are
    skipped and counted; truth gaps stay as NaN.
    """
    first = -(-max(lo, series.start_epoch + GAMMA) // GAMMA) * GAMMA
    last = min(hi, series.end_epoch) - GAMMA
    queries, skipped = [], 0
    for h in range(first, last + 1, GAMMA):
        q, gap = query_pattern(series, int(h), with_truth=True)
        if gap:
            skipped += 1
        else:
            queries.append(q)
    return queries, skipped


@dataclass(frozen=True, eq=False)
class RmseResult:
    per_dt: np.ndarray
    counts: np.ndarray
    per_minute: np.ndarray
    overall: float

    def pooled(self, lo_s: int, hi_s: int) -> float:
        """Pooled RMSE over offsets ``lo_s .. hi_s`` seconds (inclusive, 1-based)."""
        sl = slice(lo_s - 1, hi_s)
        c = self.counts[sl]
        sq = np.where(c > 0, self.per_dt[sl] ** 2 * c, 0.0)
        return float(np.sqrt(sq.sum() / c.sum()))


def rmse_per_dt(predictions, truths) -> RmseResult:
    """RMSE per offset over forecasts; NaN truths are excluded from both sums and counts.

    Minute values and the overall value pool squared errors before the root.
    """
    p = np.atleast_2d(np.asarray(predictions, dtype=np.float64))
    t = np.atleast_2d(np.asarray(truths, dtype=np.float64))
    if p.shape != t.shape or p.shape[0] == 0:
        raise EmptyDataError("need at least one forecast/truth pair of equal shape")
    ok = ~np.isnan(t)
    err = np.where(ok, p - np.where(ok, t, 0.0), 0.0)
    sq = (err * err).sum(axis=0)
    counts = ok.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_dt = np.sqrt(sq / counts)
        minutes = sq.size // 60
        per_minute = np.sqrt(sq.reshape(minutes, 60).sum(axis=1) / counts.reshape(minutes, 60).sum(axis=1))
        overall = float(np.sqrt(sq.sum() / counts.sum()))
    return RmseResult(per_dt, counts, per_minute, overall)


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    rmse: dict[str, RmseResult]
    forecast_count: int
    skipped_queries: int
    leakage_violations: int
    adaptive_k: AdaptiveKModel | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def predictors(self) -> tuple[str, ...]:
        return tuple(self.rmse)

    def overall(self, name: str) -> float:
        return self.rmse[name].overall


# A forecaster maps a query to (prediction, epochs of the patterns it used).
Forecaster = Callable[[Pattern], tuple[np.ndarray, np.ndarray]]


def wnn_forecaster(library: PatternLibrary, k_model: AdaptiveKModel) -> Forecaster:
    def run(q: Pattern):
        k = k_model.for_hour(q.hour_of_day)
        nb = find_neighbours(library, q, k.k_max)
        bucket = library.bucket(q.hour_of_day)
        return combine(bucket.targets[nb.indices], nb.distances, k), bucket.epochs[nb.indices]

    return run


def daily_profile_forecaster(library: PatternLibrary) -> Forecaster:
    means = {h: (b.targets.mean(axis=0) if len(b) else None) for h, b in library.buckets.items()}

    def run(q: Pattern):
        bucket = library.bucket(q.hour_of_day)
        if means[q.hour_of_day] is None:
            raise EmptyDataError(f"no training patterns for hour {q.hour_of_day}")
        return means[q.hour_of_day], bucket.epochs

    return run


def constant_forecaster(nominal_hz: float) -> Forecaster:
    values = predict_constant(nominal_hz).values
    empty = np.empty(0, dtype=np.int64)
    return lambda q: (values, empty)


def run_forecasts(
    forecasters: dict[str, Forecaster], queries: Sequence[Pattern], split_start: int, threads: int = 1
) -> tuple[dict[str, RmseResult], int]:
    """Evaluate every forecaster on every query; returns RMSE and leakage count.

    A leak is any used pattern whose target hour ends after ``split_start``.
    Work is spread over ``threads`` workers; results are merged in query order.
    """
    truths = np.stack([q.next_hour for q in queries])
    results, leaks = {}, 0
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        for name, fn in forecasters.items():
            outs = list(pool.map(fn, queries))
            preds = np.stack([o[0] for o in outs])
            leaks += sum(int(np.count_nonzero(o[1] + GAMMA > split_start)) for o in outs)
            results[name] = rmse_per_dt(preds, truths)
    return results, leaks


def _prepare_feature(raw: RawFeature, train_end: int, resolution: int | None) -> FeatureSeries:
    if resolution is not None:
        raw = block_average(raw, resolution)
    return minmax_scale(raw, train_end_epoch=train_end)


def evaluate(
    series: FrequencySeries,
    split: SplitSpec = SplitSpec(),
    k_candidates: Sequence[int] | None = None,
    per_hour_k: bool = True,
    threads: int = 1,
    feature: RawFeature | None = None,
    beta: float = 1.0,
    alignment: str = "forecast-hour",
    feature_resolution: int | None = None,
) -> EvaluationReport:
    """Train on the first split, fit adaptive k on validation, report test RMSE.

    With ``feature`` an extra ``wnn_extended`` predictor is scored, and only
    hours that have a complete feature window are evaluated.
    """
    train, val, test = chronological_split(series, split)
    library = build_library(train)
    val_q, skipped_v = collect_queries(series, val.start_epoch, val.end_epoch)
    test_q, skipped_t = collect_queries(series, test.start_epoch, test.end_epoch)
    skipped = skipped_v + skipped_t
    if feature is not None:
        scaled = _prepare_feature(feature, val.start_epoch, feature_resolution)
        n = len(val_q) + len(test_q)
        val_q = has_feature_window(scaled, alignment, val_q)
        test_q = has_feature_window(scaled, alignment, test_q)
        skipped += n - len(val_q) - len(test_q)
    if not val_q or not test_q:
        raise InsufficientDataError("no gap-free validation or test queries")
    k_model = fit_adaptive_k_model(library, val_q, k_candidates, per_hour=per_hour_k)
    forecasters = {
        "constant": constant_forecaster(series.nominal_hz),
        "daily_profile": daily_profile_forecaster(library),
        "wnn": wnn_forecaster(library, k_model),
    }
    fitting = {"wnn": forecasters["wnn"]}
    if feature is not None:
        flib = build_feature_library(library, scaled, alignment)
        ranker = extended_ranker(library, flib, scaled, beta)
        ext_model = fit_adaptive_k_model(library, val_q, k_candidates, per_hour=per_hour_k, ranker=ranker)
        forecasters["wnn_extended"] = fitting["wnn_extended"] = extended_forecaster(
            library, flib, scaled, beta, ext_model
        )
    rmse, leaks = run_forecasts(forecasters, test_q, test.start_epoch, threads)
    # k fitting queried the library with validation hours; check those too
    _, val_leaks = run_forecasts(fitting, val_q, val.start_epoch, threads)
    return EvaluationReport(rmse, len(test_q), skipped, leaks + val_leaks, k_model)


@dataclass(frozen=True, eq=False)
class BetaSearchResult:
    betas: tuple[float, ...]
    validation_rmse: np.ndarray
    best_beta: float
    plain_validation_rmse: float
    test_rmse_best: float
    test_rmse_plain: float
    leakage_violations: int
    skipped_queries: int

    @property
    def validation_improvement(self) -> float:
        """Relative RMSE reduction of the best beta over the plain WNN on validation."""
        return 1.0 - float(self.validation_rmse.min()) / self.plain_validation_rmse

    @property
    def test_improvement(self) -> float:
        return 1.0 - self.test_rmse_best / self.test_rmse_plain


def beta_grid_search(
    series: FrequencySeries,
    feature: RawFeature,
    betas: Sequence[float] = DEFAULT_BETAS,
    split: SplitSpec = SplitSpec(),
    alignment: str = "forecast-hour",
    k_candidates: Sequence[int] | None = None,
    per_hour_k: bool = True,
    threads: int = 1,
    feature_resolution: int | None = None,
) -> BetaSearchResult:
    """Tune the feature weight on validation RMSE.

    For each beta (and for beta = 0, the plain WNN) adaptive k is fitted on
    the validation hours under that beta's distance and the validation RMSE
    recorded. The smallest beta with the lowest RMSE wins; test RMSE is
    reported for it and for the plain WNN.
    """
    betas = tuple(float(b) for b in betas)
    if not betas:
        raise ConfigurationError("beta grid is empty")
    if min(betas) < 0:
        raise ConfigurationError("beta values must be non-negative")
    train, val, test = chronological_split(series, split)
    library = build_library(train)
    scaled = _prepare_feature(feature, val.start_epoch, feature_resolution)
    flib = build_feature_library(library, scaled, alignment)
    val_q, sv = collect_queries(series, val.start_epoch, val.end_epoch)
    test_q, st = collect_queries(series, test.start_epoch, test.end_epoch)
    n = len(val_q) + len(test_q)
    val_q = has_feature_window(scaled, alignment, val_q)
    test_q = has_feature_window(scaled, alignment, test_q)
    skipped = sv + st + n - len(val_q) - len(test_q)
    if not val_q or not test_q:
        raise InsufficientDataError("no validation or test hours with complete frequency and feature data")

    leaks = 0
    fitted = {}
    cache = DistanceCache(library, flib, scaled)

    def score(beta: float) -> float:
        nonlocal leaks
        ranker = extended_ranker(library, flib, scaled, beta, cache)
        model = fit_adaptive_k_model(library, val_q, k_candidates, per_hour=per_hour_k, ranker=ranker)
        fitted[beta] = extended_forecaster(library, flib, scaled, beta, model, cache)
        rmse, leak = run_forecasts({"x": fitted[beta]}, val_q, val.start_epoch, threads)
        leaks += leak
        return rmse["x"].overall

    plain = score(0.0)
    curve = np.array([score(b) for b in betas])
    best = min(b for b, r in zip(betas, curve) if r == curve.min())
    test_rmse, leak = run_forecasts({"best": fitted[best], "plain": fitted[0.0]}, test_q, test.start_epoch, threads)
    leaks += leak
    return BetaSearchResult(
        betas, curve, best, plain, test_rmse["best"].overall, test_rmse["plain"].overall, leaks, skipped
    )


@dataclass(frozen=True)
class SweepRow:
    interval_days: int
    predictor: str
    mean_rmse_hz: float


def training_size_sweep(
    series: FrequencySeries,
    interval_days: Sequence[int] = (7, 14, 28, 56),
    train_fraction: float = 0.8,
    k_candidates: Sequence[int] | None = None,
    per_hour_k: bool = True,
    threads: int = 1,
) -> tuple[list[SweepRow], list[str], int]:
    """Validation RMSE of each predictor trained on the most recent ``L`` days.

    The window ``[end - L days, end)`` is split chronologically at midnight;
    adaptive k is fitted on the training part alone (each training hour is
    forecast from the other training days) and every predictor is scored on
    the held-out part. Returns rows, notes about skipped intervals, and the
    leakage count.
    """
    rows, notes, leaks = [], [], 0
    for days in interval_days:
        span = int(days) * SECONDS_PER_DAY
        if days < 2:
            notes.append(f"interval {days} d skipped: shorter than 2 days")
            continue
        if span > len(series):
            notes.append(f"interval {days} d skipped: longer than the series")
            continue
        lo = series.end_epoch - span
        b = _snap_midnight(lo + int(math.floor(train_fraction * span + 1e-6)))
        if b - lo < 2 * SECONDS_PER_DAY or series.end_epoch - b < SECONDS_PER_DAY:
            notes.append(f"interval {days} d skipped: split too short")
            continue
        train = series.segment(lo, b)
        library = build_library(train)
        fit_q, _ = collect_queries(train, lo, b)
        val_q, _ = collect_queries(series, b, series.end_epoch)
        if not fit_q or not val_q:
            notes.append(f"interval {days} d skipped: no gap-free queries")
            continue
        k_model = fit_adaptive_k_model(library, fit_q, k_candidates, per_hour=per_hour_k)
        forecasters = {
            "constant": constant_forecaster(series.nominal_hz),
            "daily_profile": daily_profile_forecaster(library),
            "wnn": wnn_forecaster(library, k_model),
        }
        rmse, leak = run_forecasts(forecasters, val_q, b, threads)
        leaks += leak
        rows.extend(SweepRow(int(days), name, r.overall) for name, r in rmse.items())
    return rows, notes, leaks
