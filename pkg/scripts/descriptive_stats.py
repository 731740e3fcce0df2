"""Daily profile and spread, autocorrelation up to 20 days, increment histograms."""
import numpy as np

from _common import load, parser
from gridfreq.cli import write_csv
from gridfreq.stats import autocorrelation, daily_profile, daily_std, increment_histogram
from gridfreq.timebase import SECONDS_PER_DAY, compute_stats


def main():
    args = parser(__doc__).parse_args()
    series, _, out = load(args)
    st = compute_stats(series)
    print(f"mean {st.mean_hz:.6f} Hz  std {st.std_hz * 1e3:.2f} mHz  gaps {st.gap_fraction:.2%}")
    mean, std = daily_profile(series), daily_std(series)
    write_csv(out / "daily.csv", ["second_of_day", "mean_hz", "std_hz", "count"],
              ((str(s), mean.values[s], std.values[s], str(int(mean.counts[s]))) for s in range(SECONDS_PER_DAY)))
    max_lag = min(20 * SECONDS_PER_DAY, len(series) // 2)
    lags, acf = autocorrelation(series, max_lag, 60)
    write_csv(out / "acf.csv", ["lag_s", "acf"], ((str(int(l)), a) for l, a in zip(lags, acf)))
    daily = acf[lags % SECONDS_PER_DAY == 0][1:]
    print("acf at whole-day lags:", np.array2string(daily[:7], precision=3))
    for tau in (1, 10):
        h = increment_histogram(series, tau)
        write_csv(out / f"increments_tau{tau}.csv", ["bin_center_sigma", "density"], zip(h.bin_centers, h.densities))
        print(f"tau={tau:>2}s excess kurtosis {h.excess_kurtosis:.3f}")


if __name__ == "__main__":
    main()
