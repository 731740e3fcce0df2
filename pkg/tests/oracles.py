"""Slow reference implementations written without the package's kernels.

Everything here uses plain loops or textbook formulas so that agreement with
the vectorized code is evidence of correctness, not of shared bugs.
"""
from __future__ import annotations

import math
from collections import defaultdict

import numpy as np

HOUR = 3600
DAY = 86400


def naive_distance(a, b) -> float:
    total = 0.0
    for x, y in zip(a, b):
        total += (float(x) - float(y)) ** 2
    return math.sqrt(total)


def naive_ranking(windows, days, query, exclude_days=()):
    """(index, distance) for every admissible row sorted by distance, newer day, index."""
    rows = [
        (naive_distance(windows[i], query), -int(days[i]), i)
        for i in range(len(windows))
        if int(days[i]) not in exclude_days
    ]
    rows.sort()
    return [(i, d) for d, _, i in rows]


def direct_wnn(windows, targets, days, query, k, exclude_days=()):
    """Weighted average of the next hours of the k nearest rows, written out term by term."""
    ranked = naive_ranking(windows, days, query, exclude_days)[:k]
    d = [dist for _, dist in ranked]
    if d[-1] == d[0]:
        alpha = [1.0] * len(d)
    else:
        alpha = [(d[-1] - dj) / (d[-1] - d[0]) for dj in d]
    num = np.zeros(targets.shape[1])
    for (i, _), a in zip(ranked, alpha):
        num += a * targets[i]
    return num / sum(alpha)


def valid_pattern_epochs(values, gaps, start_epoch):
    """Every full-hour H whose previous and next hour lie in the record without gaps."""
    out = defaultdict(list)
    n = len(values)
    for off in range(n):
        epoch = start_epoch + off
        if epoch % HOUR:
            continue
        lo, hi = off - HOUR, off + HOUR
        if lo < 0 or hi > n:
            continue
        if any(gaps[lo:hi]):
            continue
        out[(epoch // HOUR) % 24].append(epoch)
    return dict(out)


def grouped_daily(values, gaps, start_epoch):
    """Per-second-of-day mean, population std and count via a dict of lists."""
    groups = defaultdict(list)
    for i, (v, g) in enumerate(zip(values, gaps)):
        if not g:
            groups[(start_epoch + i) % DAY].append(float(v))
    mean = np.full(DAY, np.nan)
    std = np.full(DAY, np.nan)
    count = np.zeros(DAY, dtype=int)
    for s, xs in groups.items():
        m = math.fsum(xs) / len(xs)
        mean[s] = m
        count[s] = len(xs)
        if len(xs) >= 2:
            std[s] = math.sqrt(math.fsum((x - m) ** 2 for x in xs) / len(xs))
    return mean, std, count


def naive_acf(values, gaps, lags):
    ok = [not g for g in gaps]
    mu = math.fsum(v for v, o in zip(values, ok) if o) / sum(ok)
    c0_terms = [(v - mu) ** 2 for v, o in zip(values, ok) if o]
    c0 = math.fsum(c0_terms) / len(c0_terms)
    out = []
    for lag in lags:
        terms = [
            (values[t] - mu) * (values[t + lag] - mu)
            for t in range(len(values) - lag)
            if ok[t] and ok[t + lag]
        ]
        out.append(math.fsum(terms) / len(terms) / c0 if terms else math.nan)
    return np.array(out)


def direct_rmse(preds, truths):
    """Per-offset RMSE by explicit accumulation over forecasts."""
    n_dt = len(preds[0])
    out = np.empty(n_dt)
    for j in range(n_dt):
        terms = [(p[j] - t[j]) ** 2 for p, t in zip(preds, truths) if not math.isnan(t[j])]
        out[j] = math.sqrt(math.fsum(terms) / len(terms)) if terms else math.nan
    return out


def minmax(values, fit_mask):
    lo = min(v for v, f in zip(values, fit_mask) if f)
    hi = max(v for v, f in zip(values, fit_mask) if f)
    return [min(1.0, max(0.0, (v - lo) / (hi - lo))) for v in values]
