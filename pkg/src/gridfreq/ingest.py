"""CSV import/export for frequency and feature records.

Frequency rows are ``timestamp,frequency_hz``; feature rows ``timestamp,value``.
Timestamps are integer UNIX seconds or RFC 3339 (naive times are UTC). A
header row is optional.
"""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import IO, Iterator

import numpy as np

from .errors import ConfigurationError, EmptyDataError, OrderingError, TimestampError
from .timebase import SECONDS_PER_HOUR, FrequencySeries, RawFeature

DEFAULT_OUTLIER_HZ = 2.0
_INT = re.compile(r"^[+-]?\d+$")
_FRACTION = re.compile(r"\.(\d+)")


@dataclass(frozen=True)
class IngestReport:
    rows_read: int = 0
    gaps_inserted: int = 0
    outliers_masked: int = 0
    duplicates_dropped: int = 0
    invalid_values: int = 0


def parse_timestamp(text: str) -> int:
    """UNIX seconds from an integer or an RFC 3339 string; sub-second parts are rejected."""
    if text.isdigit():
        return int(text)
    text = text.strip()
    if _INT.match(text):
        return int(text)
    frac = _FRACTION.search(text)
    if frac and int(frac.group(1)) != 0:
        raise TimestampError(f"sub-second timestamp not allowed: {text!r}")
    iso = text.replace("Z", "+00:00").replace("z", "+00:00")
    if frac:
        iso = iso.replace(frac.group(0), "", 1)
    try:
        dt = datetime.fromisoformat(iso.replace(" ", "T", 1))
    except ValueError:
        try:
            value = float(text)
        except ValueError:
            raise TimestampError(f"unparsable timestamp: {text!r}") from None
        if not math.isfinite(value) or value != int(value):
            raise TimestampError(f"sub-second timestamp not allowed: {text!r}") from None
        return int(value)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def _parse_value(text: str) -> float:
    # float() tolerates surrounding whitespace
    try:
        v = float(text)
    except ValueError:
        return math.nan
    return v if math.isfinite(v) else math.nan


def _rows(stream: IO[str]) -> Iterator[tuple[int, float]]:
    """Yield ``(epoch, value)``; the first row is skipped when it is a header."""
    for lineno, row in enumerate(csv.reader(stream)):
        if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
            continue
        try:
            ts = parse_timestamp(row[0])
        except TimestampError:
            if lineno == 0 and not any(ch.isdigit() for ch in row[0]):
                continue
            raise
        yield ts, _parse_value(row[1]) if len(row) > 1 else math.nan


def _dedupe(stream: IO[str]):
    epochs, values = [], []
    dupes, last = 0, None
    for ts, v in _rows(stream):
        if last is not None and ts < last:
            raise OrderingError(f"timestamp {ts} precedes {last}")
        if ts == last:
            dupes += 1
            continue
        epochs.append(ts)
        values.append(v)
        last = ts
    if not epochs:
        raise EmptyDataError("no parsable rows")
    return np.array(epochs, dtype=np.int64), np.array(values, dtype=np.float64), dupes


def parse_frequency_csv(
    stream: IO[str], nominal_hz: float = 50.0, max_abs_deviation_hz: float | None = DEFAULT_OUTLIER_HZ
) -> tuple[FrequencySeries, IngestReport]:
    """Regularize ``timestamp,frequency_hz`` rows onto the 1 s grid.

    Missing seconds, empty or non-numeric readings become gaps; for repeated
    timestamps the first row wins. Outliers are masked afterwards unless
    ``max_abs_deviation_hz`` is None.
    """
    epochs, vals, dupes = _dedupe(stream)
    start = int(epochs[0])
    n = int(epochs[-1]) - start + 1
    values = np.full(n, np.nan)
    values[epochs - start] = vals
    series = FrequencySeries(start, values, np.isnan(values), nominal_hz)
    masked = 0
    if max_abs_deviation_hz is not None:
        series, masked = mask_outliers(series, max_abs_deviation_hz)
    report = IngestReport(
        rows_read=int(epochs.size + dupes),
        gaps_inserted=n - int(epochs.size),
        outliers_masked=masked,
        duplicates_dropped=dupes,
        invalid_values=int(np.isnan(vals).sum()),
    )
    return series, report


def mask_outliers(series: FrequencySeries, max_abs_deviation_hz: float = DEFAULT_OUTLIER_HZ) -> tuple[FrequencySeries, int]:
    """Mark samples deviating more than the threshold from nominal as gaps."""
    if not max_abs_deviation_hz > 0:
        raise ValueError("max_abs_deviation_hz must be positive")
    with np.errstate(invalid="ignore"):
        bad = ~series.gap_mask & (np.abs(series.values - series.nominal_hz) > max_abs_deviation_hz)
    if not bad.any():
        return series, 0
    return FrequencySeries(series.start_epoch, series.values, series.gap_mask | bad, series.nominal_hz), int(bad.sum())


def parse_feature_csv(stream: IO[str], resolution: int | None = None) -> tuple[RawFeature, IngestReport]:
    """Read ``timestamp,value`` rows at a regular resolution dividing 3600 s.

    The resolution is inferred from the smallest timestamp step unless given.
    Missing slots and unparsable values become NaN.
    """
    epochs, vals, dupes = _dedupe(stream)
    if resolution is None:
        steps = np.diff(epochs)
        resolution = int(steps.min()) if steps.size else SECONDS_PER_HOUR
    if resolution < 1 or SECONDS_PER_HOUR % resolution:
        raise ConfigurationError(f"feature resolution {resolution} s does not divide 3600 s")
    rel = epochs - epochs[0]
    if np.any(rel % resolution):
        raise ConfigurationError(f"feature timestamps are not on a {resolution} s grid")
    n = int(rel[-1] // resolution) + 1
    values = np.full(n, np.nan)
    values[rel // resolution] = vals
    report = IngestReport(
        rows_read=int(epochs.size + dupes),
        gaps_inserted=n - int(epochs.size),
        duplicates_dropped=dupes,
        invalid_values=int(np.isnan(vals).sum()),
    )
    return RawFeature(int(epochs[0]), resolution, values), report


def _fmt(v: float) -> str:
    return "" if math.isnan(v) else repr(float(v))


def write_frequency_csv(series: FrequencySeries, stream: IO[str]) -> None:
    """Write ``timestamp,frequency_hz`` with gaps as empty fields (values round-trip exactly)."""
    stream.write("timestamp,frequency_hz\n")
    for ts, v in zip(series.epochs.tolist(), series.values.tolist()):
        stream.write(f"{ts},{_fmt(v)}\n")


def write_feature_csv(feature: RawFeature, stream: IO[str]) -> None:
    stream.write("timestamp,value\n")
    for ts, v in zip(feature.epochs.tolist(), feature.values.tolist()):
        stream.write(f"{ts},{_fmt(v)}\n")
