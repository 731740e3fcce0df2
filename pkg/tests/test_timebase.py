import numpy as np
import pytest
from hypothesis import given, strategies as st

from gridfreq.errors import EmptyDataError, WindowRangeError
from gridfreq.timebase import FrequencySeries, compute_stats, slice_window


def test_slice_second_hour_of_two():
    s = FrequencySeries.from_values(np.arange(7200, dtype=float))
    values, gap = slice_window(s, 3600, 3600)
    assert values[0] == 3600 and values.size == 3600 and not gap


def test_slice_flags_single_masked_sample():
    mask = np.zeros(100, dtype=bool)
    mask[42] = True
    s = FrequencySeries(0, np.full(100, 50.0), mask)
    assert slice_window(s, 40, 5)[1]
    assert not slice_window(s, 0, 40)[1]
    assert not slice_window(s, 43, 57)[1]


@pytest.mark.parametrize("a,n", [(-1, 5), (96, 5), (0, 101)])
def test_slice_out_of_range(a, n):
    s = FrequencySeries.from_values(np.ones(100))
    with pytest.raises(WindowRangeError):
        slice_window(s, a, n)


@given(st.integers(0, 30), st.integers(0, 30), st.integers(0, 30), st.integers(0, 2**32 - 1))
def test_slice_concatenation(a, l1, l2, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(50, 0.1, 100)
    v[rng.random(100) < 0.1] = np.nan
    s = FrequencySeries.from_values(v)
    x, gx = slice_window(s, a, l1)
    y, gy = slice_window(s, a + l1, l2)
    z, gz = slice_window(s, a, l1 + l2)
    np.testing.assert_array_equal(np.concatenate([x, y]), z)
    assert gz == (gx or gy)


def test_stats_constant():
    st_ = compute_stats(FrequencySeries.from_values(np.full(10, 50.0)))
    assert (st_.mean_hz, st_.std_hz, st_.gap_fraction) == (50.0, 0.0, 0.0)


def test_stats_two_points():
    st_ = compute_stats(FrequencySeries.from_values([49.9, 50.1]))
    assert st_.mean_hz == pytest.approx(50.0, abs=1e-12)
    assert st_.std_hz == pytest.approx(0.1, abs=1e-12)


def test_stats_masked_oracle():
    rng = np.random.default_rng(1)
    v = rng.normal(50, 0.05, 5000)
    mask = rng.random(5000) < 0.1
    st_ = compute_stats(FrequencySeries(0, v, mask))
    kept = [x for x, m in zip(v, mask) if not m]
    mean = sum(kept) / len(kept)
    std = (sum((x - mean) ** 2 for x in kept) / len(kept)) ** 0.5
    assert st_.mean_hz == pytest.approx(mean, rel=1e-12)
    assert st_.std_hz == pytest.approx(std, rel=1e-9)
    assert st_.gap_fraction == pytest.approx(mask.mean())


def test_stats_all_gaps():
    with pytest.raises(EmptyDataError):
        compute_stats(FrequencySeries.from_values([np.nan, np.nan]))


@given(st.lists(st.floats(49, 51), min_size=2, max_size=50), st.randoms())
def test_stats_permutation_invariant(values, rnd):
    shuffled = list(values)
    rnd.shuffle(shuffled)
    a = compute_stats(FrequencySeries.from_values(values))
    b = compute_stats(FrequencySeries.from_values(shuffled))
    assert a.mean_hz == pytest.approx(b.mean_hz, rel=1e-12)
    assert a.std_hz == pytest.approx(b.std_hz, rel=1e-6, abs=1e-12)


def test_series_invariants():
    with pytest.raises(ValueError):
        FrequencySeries(0, [50.0, 50.0], [False])
    with pytest.raises(ValueError):
        FrequencySeries(0, [50.0, np.inf], [False, False])
    with pytest.raises(EmptyDataError):
        FrequencySeries(0, [], [])
    s = FrequencySeries(0, [50.0, 7.0], [False, True])
    assert np.isnan(s.values[1])
    assert not s.values.flags.writeable


def test_series_hour_boundaries():
    s = FrequencySeries.from_values(np.ones(10), start_epoch=86400 * 3 - 5)
    assert s.second_of_day()[5] == 0
    assert s.end_epoch == 86400 * 3 + 5
