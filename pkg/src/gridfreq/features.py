"""Exogenous-feature extension of the WNN forecaster.

A feature (generation, demand, ...) is min-max scaled with training-split
extrema and cut into hour windows of ``3600 / resolution`` samples. The
candidate distance becomes ``|F_n - F_0| + beta * |A_n - A_0|``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DegenerateFeatureError, NoCandidatesError, ShapeError
from .patterns import Pattern, PatternLibrary, bucket_distances, excluded_days, pattern_distance, rank_candidates
from .predictor import AdaptiveK, AdaptiveKModel, ForecastTrajectory, Ranker, combine
from .timebase import SECONDS_PER_HOUR, RawFeature

ALIGNMENTS = ("past-hour", "forecast-hour")
DEFAULT_BETAS = tuple(round(0.1 * i, 10) for i in range(1, 16))


@dataclass(frozen=True, eq=False)
class FeatureSeries:
    """Min-max scaled feature; gaps are NaN in ``values`` and True in ``gap_mask``."""

    start_epoch: int
    resolution: int
    values: np.ndarray
    gap_mask: np.ndarray
    a_min: float
    a_max: float
    clipped: int = 0

    @property
    def eta(self) -> int:
        return SECONDS_PER_HOUR // self.resolution

    @property
    def end_epoch(self) -> int:
        return self.start_epoch + self.resolution * self.values.size


@dataclass(frozen=True, eq=False)
class FeaturePattern:
    window: np.ndarray
    alignment: str

    def __post_init__(self):
        if self.alignment not in ALIGNMENTS:
            raise ConfigurationError(f"unknown alignment {self.alignment!r}")
        if self.window.size * (SECONDS_PER_HOUR // self.window.size) != SECONDS_PER_HOUR:
            raise ShapeError("feature window length must divide 3600")


def _check_alignment(alignment: str) -> str:
    aliases = {"past": "past-hour", "forecast": "forecast-hour"}
    alignment = aliases.get(alignment, alignment)
    if alignment not in ALIGNMENTS:
        raise ConfigurationError(f"alignment must be one of {ALIGNMENTS}, got {alignment!r}")
    return alignment


def block_average(raw: RawFeature, resolution: int) -> RawFeature:
    """Average consecutive samples onto a coarser grid; any missing sample voids its block."""
    if resolution == raw.resolution:
        return raw
    if resolution % raw.resolution or SECONDS_PER_HOUR % resolution:
        raise ConfigurationError(
            f"cannot average {raw.resolution} s samples onto {resolution} s (must divide 3600)"
        )
    m = resolution // raw.resolution
    n = raw.values.size // m
    blocks = raw.values[: n * m].reshape(n, m)
    return RawFeature(raw.start_epoch, resolution, blocks.mean(axis=1))


def minmax_scale(raw: RawFeature, train_end_epoch: int | None = None) -> FeatureSeries:
    """Scale to ``(a - a_min) / (a_max - a_min)`` with extrema from samples before ``train_end_epoch``.

    Later samples outside ``[0, 1]`` are clipped and counted.
    """
    if SECONDS_PER_HOUR % raw.resolution:
        raise ConfigurationError("feature resolution must divide 3600 s")
    values = np.asarray(raw.values, dtype=np.float64)
    gaps = ~np.isfinite(values)
    fit = ~gaps
    if train_end_epoch is not None:
        fit &= raw.epochs < train_end_epoch
    ref = values[fit]
    if ref.size < 2 or ref.min() == ref.max():
        raise DegenerateFeatureError("feature needs at least two distinct values in the training range")
    lo, hi = float(ref.min()), float(ref.max())
    scaled = (values - lo) / (hi - lo)
    outside = ~gaps & ((scaled < 0) | (scaled > 1))
    scaled = np.where(gaps, np.nan, np.clip(scaled, 0.0, 1.0))
    return FeatureSeries(raw.start_epoch, raw.resolution, scaled, gaps, lo, hi, int(outside.sum()))


def feature_window(feature: FeatureSeries, hour_epoch: int, alignment: str) -> FeaturePattern | None:
    """Feature window paired with prediction hour ``hour_epoch``, or None if missing/gapped."""
    alignment = _check_alignment(alignment)
    start = hour_epoch - SECONDS_PER_HOUR if alignment == "past-hour" else hour_epoch
    off, rem = divmod(start - feature.start_epoch, feature.resolution)
    if rem:
        raise ConfigurationError("feature grid is not aligned with full hours")
    if off < 0 or off + feature.eta > feature.values.size:
        return None
    if feature.gap_mask[off:off + feature.eta].any():
        return None
    return FeaturePattern(feature.values[off:off + feature.eta], alignment)


@dataclass(frozen=True, eq=False)
class FeatureLibrary:
    """Feature windows row-aligned with each bucket of a pattern library."""

    alignment: str
    windows: dict[int, np.ndarray]
    valid: dict[int, np.ndarray]


def build_feature_library(library: PatternLibrary, feature: FeatureSeries, alignment: str = "forecast-hour") -> FeatureLibrary:
    alignment = _check_alignment(alignment)
    windows, valid = {}, {}
    for h, bucket in library.buckets.items():
        w = np.full((len(bucket), feature.eta), np.nan)
        ok = np.zeros(len(bucket), dtype=bool)
        for i, epoch in enumerate(bucket.epochs):
            fp = feature_window(feature, int(epoch), alignment)
            if fp is not None:
                w[i], ok[i] = fp.window, True
        windows[h], valid[h] = w, ok
    return FeatureLibrary(alignment, windows, valid)


def extended_distance(
    fq: Pattern, fc: Pattern, aq: FeaturePattern, ac: FeaturePattern, beta: float
) -> float:
    """Frequency-window distance plus ``beta`` times feature-window distance."""
    if aq.alignment != ac.alignment:
        raise ConfigurationError("feature patterns use different alignments")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    return pattern_distance(fq.window, fc.window) + beta * pattern_distance(aq.window, ac.window)


class DistanceCache:
    """Memoized frequency and feature distances per query hour.

    A beta grid search ranks the same queries many times; only the mixing
    weight changes, so the two distance vectors are computed once.
    """

    def __init__(self, library: PatternLibrary, flib: FeatureLibrary, feature: FeatureSeries):
        self.library, self.flib, self.feature = library, flib, feature
        self._store: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def get(self, q: Pattern, fq: FeaturePattern | None = None) -> tuple[np.ndarray, np.ndarray]:
        hit = self._store.get(q.hour_epoch)
        if hit is None:
            fq = fq or _query_feature(self.feature, self.flib, q)
            h = q.hour_of_day
            hit = (
                bucket_distances(self.library.bucket(h).windows, q.window),
                bucket_distances(self.flib.windows[h], fq.window),
            )
            self._store[q.hour_epoch] = hit
        return hit


def _extended_neighbours(library, flib, q, fq, beta, k_max, exclude_day=None, cache=None):
    if beta < 0:
        raise ValueError("beta must be non-negative")
    h = q.hour_of_day
    bucket = library.bucket(h)
    if cache is not None:
        d_freq, d_feat = cache.get(q, fq)
    else:
        d_freq = bucket_distances(bucket.windows, q.window)
        d_feat = bucket_distances(flib.windows[h], fq.window)
    d = d_freq + beta * d_feat
    nb = rank_candidates(d, bucket.days, k_max, excluded_days(q, exclude_day), flib.valid[h])
    return bucket, nb


def _query_feature(feature: FeatureSeries, flib: FeatureLibrary, q: Pattern) -> FeaturePattern:
    fq = feature_window(feature, q.hour_epoch, flib.alignment)
    if fq is None:
        raise NoCandidatesError(f"no feature window for query hour {q.hour_epoch}")
    return fq


def predict_wnn_extended(
    library: PatternLibrary,
    flib: FeatureLibrary,
    query: Pattern,
    feature_query: FeaturePattern,
    k,
    beta: float,
    exclude_day: int | None = None,
) -> ForecastTrajectory:
    """WNN forecast using the feature-extended distance for ranking and weights."""
    if feature_query.alignment != flib.alignment:
        raise ConfigurationError("query feature alignment differs from the feature library")
    k_max = k.k_max if isinstance(k, AdaptiveK) else int(k)
    bucket, nb = _extended_neighbours(library, flib, query, feature_query, beta, k_max, exclude_day)
    values = combine(bucket.targets[nb.indices], nb.distances, k)
    return ForecastTrajectory(query.hour_epoch - 1, values, "wnn_extended")


def extended_ranker(
    library: PatternLibrary, flib: FeatureLibrary, feature: FeatureSeries, beta: float, cache: DistanceCache | None = None
) -> Ranker:
    """Ranker for adaptive-k fitting under the extended distance."""

    def rank(q: Pattern, k: int):
        fq = None if cache is not None else _query_feature(feature, flib, q)
        bucket, nb = _extended_neighbours(library, flib, q, fq, beta, k, cache=cache)
        return bucket.targets[nb.indices], nb.distances

    return rank


def extended_forecaster(
    library: PatternLibrary,
    flib: FeatureLibrary,
    feature: FeatureSeries,
    beta: float,
    k_model: AdaptiveKModel,
    cache: DistanceCache | None = None,
):
    """Evaluation forecaster: ``query -> (prediction, epochs of neighbours used)``."""

    def run(q: Pattern):
        k = k_model.for_hour(q.hour_of_day)
        fq = None if cache is not None else _query_feature(feature, flib, q)
        bucket, nb = _extended_neighbours(library, flib, q, fq, beta, k.k_max, cache=cache)
        return combine(bucket.targets[nb.indices], nb.distances, k), bucket.epochs[nb.indices]

    return run


def has_feature_window(feature: FeatureSeries, alignment: str, queries: Sequence[Pattern]) -> list[Pattern]:
    """Subset of ``queries`` that have a complete feature window."""
    return [q for q in queries if feature_window(feature, q.hour_epoch, alignment) is not None]
