"""Frequency records on a strict 1 s UTC grid with an explicit gap mask."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyDataError, WindowRangeError

SECONDS_PER_HOUR = 3600
SECONDS_PER_DAY = 86400


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FrequencySeries:
    """Uniform 1 Hz frequency record.

    ``values[i]`` is the frequency at ``start_epoch + i``. Samples flagged in
    ``gap_mask`` are missing; their stored value is NaN and carries no meaning.
    """

    start_epoch: int
    values: np.ndarray
    gap_mask: np.ndarray
    nominal_hz: float = 50.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        mask = np.array(self.gap_mask, dtype=bool)
        if values.ndim != 1 or mask.shape != values.shape:
            raise ValueError("values and gap_mask must be 1-d with identical length")
        if values.size < 1:
            raise EmptyDataError("a frequency series needs at least one sample")
        if not np.all(np.isfinite(values[~mask])):
            raise ValueError("non-gap samples must be finite")
        if int(self.start_epoch) != self.start_epoch:
            raise ValueError("start_epoch must be an integer number of seconds")
        values[mask] = np.nan
        object.__setattr__(self, "start_epoch", int(self.start_epoch))
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "gap_mask", _frozen(mask))

    @classmethod
    def from_values(cls, values, start_epoch: int = 0, nominal_hz: float = 50.0) -> FrequencySeries:
        """Build a series treating NaN entries as gaps."""
        values = np.asarray(values, dtype=np.float64)
        return cls(start_epoch, values, ~np.isfinite(values), nominal_hz)

    def __len__(self) -> int:
        return self.values.size

    @property
    def end_epoch(self) -> int:
        """Exclusive end: one second past the last sample."""
        return self.start_epoch + len(self)

    @property
    def epochs(self) -> np.ndarray:
        return np.arange(self.start_epoch, self.end_epoch, dtype=np.int64)

    def second_of_day(self) -> np.ndarray:
        return self.epochs % SECONDS_PER_DAY

    def segment(self, start_epoch: int, end_epoch: int) -> FrequencySeries:
        """Sub-series covering ``[start_epoch, end_epoch)``."""
        a, b = start_epoch - self.start_epoch, end_epoch - self.start_epoch
        if a < 0 or b > len(self) or b <= a:
            raise WindowRangeError(f"segment [{start_epoch}, {end_epoch}) outside series")
        return FrequencySeries(start_epoch, self.values[a:b], self.gap_mask[a:b], self.nominal_hz)

    def shifted(self, offset_hz: float) -> FrequencySeries:
        return FrequencySeries(self.start_epoch, self.values + offset_hz, self.gap_mask, self.nominal_hz)

    def negated(self) -> FrequencySeries:
        return FrequencySeries(self.start_epoch, -self.values, self.gap_mask, self.nominal_hz)


@dataclass(frozen=True, eq=False)
class RawFeature:
    """Exogenous series in original units at a regular resolution (NaN = missing)."""

    start_epoch: int
    resolution: int
    values: np.ndarray

    def __post_init__(self):
        if self.resolution < 1:
            raise ValueError("resolution must be a positive number of seconds")
        object.__setattr__(self, "values", _frozen(np.array(self.values, dtype=np.float64)))

    def __len__(self) -> int:
        return self.values.size

    @property
    def epochs(self) -> np.ndarray:
        return self.start_epoch + self.resolution * np.arange(self.values.size, dtype=np.int64)


@dataclass(frozen=True)
class SeriesStats:
    mean_hz: float
    std_hz: float
    gap_fraction: float


def slice_window(series: FrequencySeries, start_offset: int, length: int) -> tuple[np.ndarray, bool]:
    """Return ``(values, any_gap)`` for ``length`` samples from ``start_offset``."""
    if start_offset < 0 or length < 0 or start_offset + length > len(series):
        raise WindowRangeError(
            f"window [{start_offset}, {start_offset + length}) outside series of length {len(series)}"
        )
    stop = start_offset + length
    return series.values[start_offset:stop], bool(series.gap_mask[start_offset:stop].any())


def compute_stats(series: FrequencySeries) -> SeriesStats:
    """Mean and population standard deviation over non-gap samples."""
    valid = series.values[~series.gap_mask]
    if valid.size == 0:
        raise EmptyDataError("series has no valid samples")
    mean = float(valid.mean())
    std = float(np.sqrt(np.mean((valid - mean) ** 2)))
    return SeriesStats(mean, std, float(series.gap_mask.mean()))
