"""Test RMSE per minute of the hour: constant, daily profile and WNN (70/15/15 split)."""
from _common import load, parser
from gridfreq.cli import write_csv
from gridfreq.evaluation import evaluate


def main():
    p = parser(__doc__)
    p.add_argument("--threads", type=int, default=1)
    args = p.parse_args()
    series, _, out = load(args)
    rep = evaluate(series, threads=args.threads)
    names = list(rep.rmse)
    write_csv(out / "rmse_per_minute.csv", ["minute"] + [f"rmse_{n}_hz" for n in names],
              ([str(m)] + [rep.rmse[n].per_minute[m] for n in names] for m in range(60)))
    print(f"{rep.forecast_count} test forecasts, {rep.leakage_violations} leaks")
    for n in names:
        r = rep.rmse[n]
        print(f"{n:>14}: minutes 1-5 {r.pooled(1, 300) * 1e3:6.2f} mHz   hour {r.overall * 1e3:6.2f} mHz")


if __name__ == "__main__":
    main()
