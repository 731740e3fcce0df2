"""Grid search of the feature weight beta; validation curve and test comparison."""
from _common import load, parser
from gridfreq.cli import write_csv
from gridfreq.evaluation import beta_grid_search


def main():
    p = parser(__doc__)
    p.add_argument("--alignment", default="forecast-hour", choices=["past-hour", "forecast-hour"])
    p.add_argument("--threads", type=int, default=1)
    args = p.parse_args()
    series, feature, out = load(args)
    if feature is None:
        raise SystemExit("a feature CSV is required with --input")
    res = beta_grid_search(series, feature, alignment=args.alignment, threads=args.threads)
    write_csv(out / "beta_curve.csv", ["beta", "mean_rmse_hz"],
              [(0.0, res.plain_validation_rmse)] + list(zip(res.betas, res.validation_rmse)))
    print(f"plain WNN validation RMSE {res.plain_validation_rmse * 1e3:.3f} mHz")
    for b, r in zip(res.betas, res.validation_rmse):
        print(f"  beta {b:.1f}: {r * 1e3:.3f} mHz")
    print(f"best beta {res.best_beta}: validation gain {res.validation_improvement:.2%}, "
          f"test gain {res.test_improvement:.2%}, leaks {res.leakage_violations}")


if __name__ == "__main__":
    main()
