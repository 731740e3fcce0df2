"""Weighted-nearest-neighbour, daily-profile and constant forecasters plus adaptive k."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyDataError, NoCandidatesError
from .patterns import GAMMA, Pattern, PatternLibrary, find_neighbours

DEFAULT_K_MAX = 50
SMOOTHING_WINDOW = 61


@dataclass(frozen=True, eq=False)
class ForecastTrajectory:
    """Predicted frequency at ``origin_epoch + dt`` for ``dt = 1 .. 3600``."""

    origin_epoch: int
    values: np.ndarray
    predictor_id: str

    @property
    def delta_t(self) -> np.ndarray:
        return np.arange(1, self.values.size + 1)


@dataclass(frozen=True, eq=False)
class AdaptiveK:
    """Neighbour count per forecast offset (index 0 is ``dt = 1 s``)."""

    k_per_dt: np.ndarray
    smoothing_window: int = SMOOTHING_WINDOW
    candidates: tuple[int, ...] = ()
    raw_k_per_dt: np.ndarray | None = None
    # validation MSE, shape (len(candidates), 3600)
    validation_mse: np.ndarray | None = None

    @property
    def k_max(self) -> int:
        return int(self.k_per_dt.max())

    @classmethod
    def constant(cls, k: int) -> AdaptiveK:
        return cls(np.full(GAMMA, k, dtype=np.int64), 1, (k,))


@dataclass(frozen=True, eq=False)
class AdaptiveKModel:
    """Adaptive-k vectors per hour of day with a pooled fallback."""

    pooled: AdaptiveK
    by_hour: dict[int, AdaptiveK] = field(default_factory=dict)

    def for_hour(self, hour: int) -> AdaptiveK:
        return self.by_hour.get(hour, self.pooled)


def wnn_weights(distances) -> np.ndarray:
    """Linear distance weights ``(d_k - d_j) / (d_k - d_1)``.

    Equal first and last distances (including ``k = 1``) give uniform weights.
    """
    d = np.asarray(distances, dtype=np.float64)
    if d.ndim != 1 or d.size < 1:
        raise ValueError("need at least one distance")
    span = d[-1] - d[0]
    if span == 0:
        return np.ones(d.size)
    return (d[-1] - d) / span


def _normalized(distances: np.ndarray) -> np.ndarray:
    a = wnn_weights(distances)
    return a / a.sum()


def combine(targets: np.ndarray, distances: np.ndarray, k) -> np.ndarray:
    """Weighted average of ranked next-hour rows.

    ``targets`` holds the neighbours' next hours in rank order. ``k`` is an
    int or an :class:`AdaptiveK`; any k beyond the available rows is clamped.
    The average is anchored on the nearest row, so identical candidates
    reproduce themselves exactly.
    """
    m = targets.shape[0]
    if m == 0:
        raise NoCandidatesError("no neighbours to combine")
    anchor = targets[0]
    if isinstance(k, AdaptiveK):
        k_dt = np.minimum(k.k_per_dt, m)
        out = np.empty(targets.shape[1])
        for kk in np.unique(k_dt):
            cols = k_dt == kk
            w = _normalized(distances[:kk])
            out[cols] = anchor[cols] + w[1:] @ (targets[1:kk, cols] - anchor[cols])
        return out
    kk = min(int(k), m)
    w = _normalized(distances[:kk])
    return anchor + w[1:] @ (targets[1:kk] - anchor)


def _k_max(k) -> int:
    return k.k_max if isinstance(k, AdaptiveK) else int(k)


def predict_wnn(
    library: PatternLibrary, query: Pattern, k, exclude_day: int | None = None
) -> ForecastTrajectory:
    """Forecast the hour after ``query`` from its nearest same-hour patterns.

    Neighbours are ranked once by full-window distance; an adaptive ``k``
    then uses a rank prefix of size ``k_per_dt`` at each offset.
    """
    if np.isnan(query.window).any():
        raise ValueError("query window contains gaps")
    nb = find_neighbours(library, query, _k_max(k), exclude_day)
    bucket = library.bucket(query.hour_of_day)
    values = combine(bucket.targets[nb.indices], nb.distances, k)
    return ForecastTrajectory(query.hour_epoch - 1, values, "wnn")


def predict_daily_profile(library: PatternLibrary, hour: int, origin_epoch: int = 0) -> ForecastTrajectory:
    """Unweighted mean of every next hour in the bucket."""
    bucket = library.bucket(hour)
    if len(bucket) == 0:
        raise NoCandidatesError(f"bucket {hour} is empty")
    return ForecastTrajectory(origin_epoch, bucket.targets.mean(axis=0), "daily_profile")


def predict_constant(nominal_hz: float = 50.0, origin_epoch: int = 0) -> ForecastTrajectory:
    return ForecastTrajectory(origin_epoch, np.full(GAMMA, float(nominal_hz)), "constant")


def default_k_candidates(library: PatternLibrary, k_max: int = DEFAULT_K_MAX) -> tuple[int, ...]:
    largest = max(library.bucket_sizes().values(), default=0)
    return tuple(range(1, max(1, min(k_max, largest)) + 1))


def candidate_predictions(
    targets: np.ndarray, distances: np.ndarray, candidates: Sequence[int]
) -> np.ndarray:
    """Forecasts for every candidate k at once, shape ``(len(candidates), 3600)``."""
    m = targets.shape[0]
    weights = np.zeros((len(candidates), m))
    for row, k in enumerate(candidates):
        kk = min(k, m)
        weights[row, :kk] = _normalized(distances[:kk])
    anchor = targets[0]
    return anchor + weights[:, 1:] @ (targets[1:] - anchor)


def smooth_k(raw: np.ndarray, candidates: Sequence[int], window: int = SMOOTHING_WINDOW) -> np.ndarray:
    """Centered moving average (edge-truncated), snapped to the nearest candidate."""
    cands = np.array(sorted(candidates), dtype=np.int64)
    raw = np.asarray(raw, dtype=np.float64)
    if window > 1:
        kernel = np.ones(window)
        avg = np.convolve(raw, kernel, mode="same") / np.convolve(np.ones(raw.size), kernel, mode="same")
    else:
        avg = raw
    hi = np.clip(np.searchsorted(cands, avg), 0, cands.size - 1)
    lo = np.clip(hi - 1, 0, cands.size - 1)
    # ties between two candidates go to the smaller one
    pick_lo = np.abs(avg - cands[lo]) <= np.abs(cands[hi] - avg)
    return np.where(pick_lo, cands[lo], cands[hi])


# A ranker returns the ranked next hours and distances of up to k neighbours.
Ranker = Callable[[Pattern, int], tuple[np.ndarray, np.ndarray]]


def plain_ranker(library: PatternLibrary) -> Ranker:
    def rank(q: Pattern, k: int):
        nb = find_neighbours(library, q, k)
        return library.bucket(q.hour_of_day).targets[nb.indices], nb.distances

    return rank


def _squared_errors(ranker, queries, cands, truths):
    """Per-hour sums of squared error for every candidate k, plus valid counts."""
    sums: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for i, q in enumerate(queries):
        truth = q.next_hour if truths is None else truths[i]
        targets, distances = ranker(q, cands[-1])
        preds = candidate_predictions(targets, distances, cands)
        ok = ~np.isnan(truth)
        err = np.where(ok, preds - np.where(ok, truth, 0.0), 0.0)
        sq, cnt = sums.setdefault(q.hour_of_day, (np.zeros((len(cands), GAMMA)), np.zeros(GAMMA)))
        sq += err * err
        cnt += ok
    return sums


def _select(sq_sum, counts, cands, smoothing_window) -> AdaptiveK:
    with np.errstate(invalid="ignore", divide="ignore"):
        mse = sq_sum / counts
    # offsets without any valid truth fall back to the smallest k
    raw = np.array(cands)[np.argmin(np.where(np.isnan(mse), np.inf, mse), axis=0)]
    return AdaptiveK(smooth_k(raw, cands, smoothing_window), smoothing_window, cands, raw, mse)


def _candidates(library, k_candidates):
    cands = tuple(sorted(k_candidates or default_k_candidates(library)))
    if not cands or cands[0] < 1:
        raise ValueError("k_candidates must be positive integers")
    return cands


def fit_adaptive_k(
    library: PatternLibrary,
    queries: Sequence[Pattern],
    k_candidates: Sequence[int] | None = None,
    smoothing_window: int = SMOOTHING_WINDOW,
    truths: np.ndarray | None = None,
    ranker: Ranker | None = None,
) -> AdaptiveK:
    """Pick, per offset, the candidate k with the lowest validation MSE, then smooth.

    Truths default to each query's ``next_hour``; NaN truth samples are
    skipped. Ties go to the smaller k.
    """
    if len(queries) == 0:
        raise EmptyDataError("adaptive k needs at least one validation query")
    cands = _candidates(library, k_candidates)
    sums = _squared_errors(ranker or plain_ranker(library), queries, cands, truths)
    sq = sum(sums[h][0] for h in sorted(sums))
    cnt = sum(sums[h][1] for h in sorted(sums))
    return _select(sq, cnt, cands, smoothing_window)


def fit_adaptive_k_model(
    library: PatternLibrary,
    queries: Sequence[Pattern],
    k_candidates: Sequence[int] | None = None,
    smoothing_window: int = SMOOTHING_WINDOW,
    per_hour: bool = True,
    ranker: Ranker | None = None,
) -> AdaptiveKModel:
    """Pooled adaptive k plus, when ``per_hour``, one vector per hour bucket."""
    if len(queries) == 0:
        raise EmptyDataError("adaptive k needs at least one validation query")
    cands = _candidates(library, k_candidates)
    sums = _squared_errors(ranker or plain_ranker(library), queries, cands, None)
    hours = sorted(sums)
    pooled = _select(sum(sums[h][0] for h in hours), sum(sums[h][1] for h in hours), cands, smoothing_window)
    by_hour = {h: _select(*sums[h], cands, smoothing_window) for h in hours} if per_hour else {}
    return AdaptiveKModel(pooled, by_hour)
