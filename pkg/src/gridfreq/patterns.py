"""Hour-aligned pattern library and exact nearest-neighbour search.

A pattern for prediction hour ``H`` (an epoch on a full hour) pairs the
observed hour ``[H - 3600, H)`` with the following hour ``[H, H + 3600)``.
Patterns are bucketed by the clock hour of ``H``, so candidates in one bucket
are exactly 24 h apart and never overlap.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, NoCandidatesError, ShapeError, WindowRangeError
from .timebase import SECONDS_PER_DAY, SECONDS_PER_HOUR, FrequencySeries

GAMMA = SECONDS_PER_HOUR
TAU = 1


@dataclass(frozen=True, eq=False)
class Pattern:
    """One observed hour, optionally with the hour that followed it.

    ``hour_epoch`` is the first second of the hour being predicted; the
    window covers the 3600 s before it.
    """

    hour_epoch: int
    window: np.ndarray
    next_hour: np.ndarray | None = None

    def __post_init__(self):
        if self.window.shape != (GAMMA,):
            raise ShapeError(f"pattern window must hold {GAMMA} samples")
        if self.next_hour is not None and self.next_hour.shape != (GAMMA,):
            raise ShapeError(f"next_hour must hold {GAMMA} samples")

    @property
    def hour_of_day(self) -> int:
        return (self.hour_epoch // SECONDS_PER_HOUR) % 24

    @property
    def day_index(self) -> int:
        return self.hour_epoch // SECONDS_PER_DAY


@dataclass(frozen=True, eq=False)
class Bucket:
    """All library patterns for one prediction hour, stacked row-wise in time order."""

    hour: int
    windows: np.ndarray
    targets: np.ndarray
    epochs: np.ndarray

    def __len__(self) -> int:
        return self.epochs.size

    @property
    def days(self) -> np.ndarray:
        return self.epochs // SECONDS_PER_DAY

    def pattern(self, i: int) -> Pattern:
        return Pattern(int(self.epochs[i]), self.windows[i], self.targets[i])


@dataclass(frozen=True, eq=False)
class PatternLibrary:
    buckets: dict[int, Bucket]
    gamma: int = GAMMA
    tau: int = TAU

    def bucket(self, hour: int) -> Bucket:
        return self.buckets[hour]

    def __len__(self) -> int:
        return sum(len(b) for b in self.buckets.values())

    def bucket_sizes(self) -> dict[int, int]:
        return {h: len(b) for h, b in self.buckets.items()}


@dataclass(frozen=True, eq=False)
class NeighbourSet:
    indices: np.ndarray
    distances: np.ndarray
    reduced: bool = False

    def __len__(self) -> int:
        return self.indices.size


def _gap_prefix(series: FrequencySeries) -> np.ndarray:
    return np.concatenate(([0], np.cumsum(series.gap_mask, dtype=np.int64)))


def hour_starts(series: FrequencySeries, lo: int, hi: int) -> np.ndarray:
    """Full-hour epochs ``H`` with ``[H - 3600, H + 3600)`` inside ``[lo, hi)`` and the series."""
    lo = max(lo, series.start_epoch + GAMMA)
    hi = min(hi, series.end_epoch - GAMMA)
    first = -(-lo // GAMMA) * GAMMA
    if first > hi:
        return np.empty(0, dtype=np.int64)
    return np.arange(first, hi + 1, GAMMA, dtype=np.int64)


def build_library(series: FrequencySeries) -> PatternLibrary:
    """Collect every gap-free (past hour, next hour) pair into its hour bucket."""
    if len(series) < 2 * SECONDS_PER_DAY:
        raise InsufficientDataError("pattern library needs at least 2 days of data")
    starts = hour_starts(series, series.start_epoch, series.end_epoch)
    prefix = _gap_prefix(series)
    offs = starts - series.start_epoch
    clean = prefix[offs + GAMMA] - prefix[offs - GAMMA] == 0
    starts, offs = starts[clean], offs[clean]
    hours = (starts // GAMMA) % 24
    idx = np.arange(GAMMA)
    buckets = {}
    for h in range(24):
        sel = offs[hours == h]
        windows = series.values[sel[:, None] - GAMMA + idx]
        targets = series.values[sel[:, None] + idx]
        epochs = starts[hours == h].copy()
        for a in (windows, targets, epochs):
            a.setflags(write=False)
        buckets[h] = Bucket(h, windows, targets, epochs)
    return PatternLibrary(buckets)


def query_pattern(series: FrequencySeries, hour_epoch: int, with_truth: bool = False) -> tuple[Pattern, bool]:
    """Observed hour preceding ``hour_epoch`` as a query, plus a gap flag.

    With ``with_truth`` the following hour is attached as ``next_hour`` (gaps
    left as NaN), so it must lie inside the series.
    """
    if hour_epoch % GAMMA:
        raise ValueError("hour_epoch must be a full hour")
    a = hour_epoch - GAMMA - series.start_epoch
    b = hour_epoch + (GAMMA if with_truth else 0) - series.start_epoch
    if a < 0 or b > len(series):
        raise WindowRangeError("query hour not covered by the series")
    window = series.values[a:a + GAMMA]
    gap = bool(series.gap_mask[a:a + GAMMA].any())
    truth = series.values[a + GAMMA:b] if with_truth else None
    return Pattern(int(hour_epoch), window, truth), gap


def pattern_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean distance between two pattern vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"pattern shapes differ: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sqrt(np.dot(d, d)))


def bucket_distances(windows: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Distances from ``query`` to every row of ``windows`` (dense, branch-free)."""
    d = windows - query
    return np.sqrt(np.einsum("ij,ij->i", d, d))


def rank_candidates(
    distances: np.ndarray, days: np.ndarray, k: int, exclude_days=(), allowed: np.ndarray | None = None
) -> NeighbourSet:
    """k smallest distances; ties go to the more recent day, then the lower index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    keep = ~np.isin(days, list(exclude_days))
    if allowed is not None:
        keep &= allowed
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        raise NoCandidatesError("no candidate patterns in bucket")
    order = np.lexsort((idx, -days[idx], distances[idx]))
    take = idx[order[:k]]
    return NeighbourSet(take, distances[take], reduced=idx.size < k)


def find_neighbours(
    library: PatternLibrary, query: Pattern, k: int, exclude_day: int | None = None
) -> NeighbourSet:
    """Exact k-nearest search within the query's hour bucket.

    The query's own day is never a candidate; ``exclude_day`` removes one more.
    When fewer than ``k`` candidates remain, all of them are returned and
    ``reduced`` is set.
    """
    bucket = library.bucket(query.hour_of_day)
    dist = bucket_distances(bucket.windows, query.window)
    return rank_candidates(dist, bucket.days, k, excluded_days(query, exclude_day))


def excluded_days(query: Pattern, exclude_day: int | None = None) -> tuple[int, ...]:
    if exclude_day is None:
        return (query.day_index,)
    return (query.day_index, exclude_day)
