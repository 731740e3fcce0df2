"""Descriptive statistics: daily profile and spread, autocorrelation, increments."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft

from .errors import DegenerateSeriesError, InsufficientDataError
from .timebase import SECONDS_PER_DAY, FrequencySeries, compute_stats


@dataclass(frozen=True, eq=False)
class DailyCurve:
    """One value per second of day; NaN where too few samples exist."""

    values: np.ndarray
    counts: np.ndarray


@dataclass(frozen=True, eq=False)
class IncrementHistogram:
    tau: int
    bin_edges: np.ndarray
    densities: np.ndarray
    excess_kurtosis: float
    n_increments: int

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def _grouped(series: FrequencySeries):
    if len(series) < SECONDS_PER_DAY:
        raise InsufficientDataError("daily statistics need at least one day of data")
    ok = ~series.gap_mask
    sod = series.second_of_day()[ok]
    vals = series.values[ok]
    counts = np.bincount(sod, minlength=SECONDS_PER_DAY)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.bincount(sod, weights=vals, minlength=SECONDS_PER_DAY) / counts
    return sod, vals, counts, mean


def daily_profile(series: FrequencySeries) -> DailyCurve:
    """Mean frequency for every second of the day over all days."""
    _, _, counts, mean = _grouped(series)
    return DailyCurve(mean, counts)


def daily_std(series: FrequencySeries) -> DailyCurve:
    """Population standard deviation per second of day; NaN where fewer than 2 samples."""
    sod, vals, counts, mean = _grouped(series)
    dev = vals - mean[sod]
    with np.errstate(invalid="ignore", divide="ignore"):
        std = np.sqrt(np.bincount(sod, weights=dev * dev, minlength=SECONDS_PER_DAY) / counts)
    std[counts < 2] = np.nan
    return DailyCurve(std, counts)


def autocorrelation(series: FrequencySeries, max_lag: int, lag_stride: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise-complete autocorrelation at lags ``0, stride, ..., <= max_lag``.

    ``C(l)`` averages ``(f(t) - mu)(f(t + l) - mu)`` over pairs where both
    samples exist, ``mu`` being the mean of all valid samples. Lags without
    any pair are NaN. Sums are evaluated with FFTs.
    """
    n = len(series)
    if max_lag >= n:
        raise InsufficientDataError(f"max_lag {max_lag} s not below series length {n} s")
    if lag_stride < 1 or max_lag < 0:
        raise ValueError("lag_stride must be >= 1 and max_lag >= 0")
    ok = ~series.gap_mask
    if compute_stats(series).std_hz == 0:
        raise DegenerateSeriesError("series has zero variance")
    x = np.where(ok, series.values - series.values[ok].mean(), 0.0)
    m = ok.astype(np.float64)
    size = fft.next_fast_len(n + max_lag + 1, real=True)
    fx, fm = fft.rfft(x, size), fft.rfft(m, size)
    sums = fft.irfft(fx * np.conj(fx), size)[: max_lag + 1]
    pairs = np.rint(fft.irfft(fm * np.conj(fm), size)[: max_lag + 1])
    lags = np.arange(0, max_lag + 1, lag_stride)
    c0 = np.dot(x, x) / ok.sum()
    with np.errstate(invalid="ignore", divide="ignore"):
        acf = np.where(pairs[lags] > 0, sums[lags] / pairs[lags], np.nan) / c0
    acf[0] = 1.0
    return lags, acf


def increments(series: FrequencySeries, tau: int) -> np.ndarray:
    """All ``f(t + tau) - f(t)`` with both samples present."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if tau >= len(series):
        raise InsufficientDataError("tau exceeds the series length")
    v, g = series.values, series.gap_mask
    ok = ~g[:-tau] & ~g[tau:]
    return (v[tau:] - v[:-tau])[ok]


def excess_kurtosis(x: np.ndarray) -> float:
    d = x - x.mean()
    m2 = np.mean(d * d)
    return float(np.mean(d**4) / (m2 * m2) - 3.0)


def increment_histogram(
    series: FrequencySeries, tau: int, bins: int = 101, range_sigma: float = 10.0
) -> IncrementHistogram:
    """Density of increments in units of the series' standard deviation.

    Bins are uniform over ``[-range_sigma, range_sigma]``; values beyond are
    counted in the end bins.
    """
    sigma = compute_stats(series).std_hz
    if sigma == 0:
        raise DegenerateSeriesError("series has zero standard deviation")
    z = increments(series, tau) / sigma
    if z.size < 2:
        raise InsufficientDataError("fewer than two increments")
    edges = np.linspace(-range_sigma, range_sigma, bins + 1)
    counts, _ = np.histogram(np.clip(z, -range_sigma, range_sigma), bins=edges)
    density = counts / (z.size * np.diff(edges))
    kurt = excess_kurtosis(z) if np.ptp(z) > 0 else float("nan")
    return IncrementHistogram(int(tau), edges, density, kurt, int(z.size))
