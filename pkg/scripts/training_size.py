"""Validation RMSE versus length of the most recent training interval (80/20 split)."""
from _common import load, parser
from gridfreq.cli import write_csv
from gridfreq.evaluation import training_size_sweep


def main():
    p = parser(__doc__)
    p.add_argument("--intervals-days", type=int, nargs="+", default=[7, 14, 28, 56])
    p.add_argument("--threads", type=int, default=1)
    args = p.parse_args()
    series, _, out = load(args)
    rows, notes, leaks = training_size_sweep(series, args.intervals_days, threads=args.threads)
    write_csv(out / "sweep.csv", ["interval_days", "predictor", "mean_rmse_hz"],
              ((str(r.interval_days), r.predictor, r.mean_rmse_hz) for r in rows))
    table = {(r.interval_days, r.predictor): r.mean_rmse_hz for r in rows}
    for d in sorted({r.interval_days for r in rows}):
        w, dp, c = (table[(d, n)] * 1e3 for n in ("wnn", "daily_profile", "constant"))
        print(f"{d:>4} d  wnn {w:6.2f}  daily profile {dp:6.2f}  constant {c:6.2f} mHz  wnn/dp {w / dp:.3f}")
    for n in notes:
        print("note:", n)
    print("leaks:", leaks)


if __name__ == "__main__":
    main()
