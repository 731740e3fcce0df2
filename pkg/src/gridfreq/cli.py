"""Command-line front end; every subcommand writes plot-ready CSV plus a run manifest."""
from __future__ import annotations

import argparse
import hashlib
import platform
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy

from . import __version__
from .errors import ConfigurationError, GridFreqError, InsufficientDataError
from .evaluation import (
    SplitSpec,
    beta_grid_search,
    chronological_split,
    collect_queries,
    evaluate,
    training_size_sweep,
)
from .features import (
    DEFAULT_BETAS,
    block_average,
    build_feature_library,
    feature_window,
    minmax_scale,
    predict_wnn_extended,
)
from .ingest import (
    DEFAULT_OUTLIER_HZ,
    parse_feature_csv,
    parse_frequency_csv,
    parse_timestamp,
    write_feature_csv,
    write_frequency_csv,
)
from .patterns import GAMMA, build_library, query_pattern
from .predictor import fit_adaptive_k_model, predict_wnn
from .stats import autocorrelation, daily_profile, daily_std, increment_histogram
from .synth import SynthSpec, generate, generate_feature
from .timebase import SECONDS_PER_DAY, compute_stats

MANIFEST = "run_manifest.txt"
COMMANDS = ("synth", "ingest", "stats", "forecast", "evaluate", "sweep", "tune-beta")


def fmt(x) -> str:
    return f"{float(x):.9g}"


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(c if isinstance(c, str) else fmt(c) for c in row) + "\n")


def sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings of one invocation, as recorded in the manifest."""

    subcommand: str
    inputs: tuple[str, ...]
    out_dir: str
    options: tuple[tuple[str, str], ...]

    @classmethod
    def from_args(cls, args: argparse.Namespace, inputs: Sequence[str], out_dir: Path) -> "RunConfig":
        skip = {"command", "func", "config"}
        opts = tuple((k, str(v)) for k, v in sorted(vars(args).items()) if k not in skip)
        return cls(args.command, tuple(str(p) for p in inputs), str(out_dir), opts)


def _inputs(args: argparse.Namespace) -> list[str]:
    return [p for p in (getattr(args, "input", None), getattr(args, "feature", None)) if p]


def _manifest_dir(args: argparse.Namespace) -> Path:
    return Path(args.out).parent if args.command == "synth" else Path(args.out_dir)


def write_manifest(args: argparse.Namespace, status: str) -> None:
    """Record config, input digests, versions and outcome next to the outputs."""
    out_dir = _manifest_dir(args)
    cfg = RunConfig.from_args(args, _inputs(args), out_dir)
    lines = [f"subcommand={cfg.subcommand}", f"status={status}"]
    lines += [f"config.{k}={v}" for k, v in cfg.options]
    for p in cfg.inputs:
        digest = sha256(p) if Path(p).is_file() else "unreadable"
        lines.append(f"input_sha256.{p}={digest}")
    lines += [
        f"version.gridfreq={__version__}",
        f"version.python={platform.python_version()}",
        f"version.numpy={np.__version__}",
        f"version.scipy={scipy.__version__}",
    ]
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / MANIFEST).write_text("\n".join(lines) + "\n")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_series(args):
    with open(args.input, newline="") as fh:
        series, report = parse_frequency_csv(
            fh, args.nominal_hz, args.outlier_threshold if args.outlier_threshold > 0 else None
        )
    return series, report


def _load_feature(path):
    with open(path, newline="") as fh:
        return parse_feature_csv(fh)[0]


def _parse_epoch(text: str) -> int:
    return parse_timestamp(text)


# --- subcommands -----------------------------------------------------------


def cmd_synth(args) -> None:
    spec = SynthSpec(days=args.days, seed=args.seed, jump_jitter=args.jump_jitter)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    series = generate(spec)
    with open(out, "w") as fh:
        write_frequency_csv(series, fh)
    if args.feature_out:
        with open(args.feature_out, "w") as fh:
            write_feature_csv(generate_feature(spec, coupling=args.coupling), fh)


def cmd_ingest(args) -> None:
    out = _out_dir(args)
    series, report = _load_series(args)
    with open(out / "frequency_clean.csv", "w") as fh:
        write_frequency_csv(series, fh)
    write_csv(out / "ingest_report.csv", ["field", "value"], [(k, str(v)) for k, v in vars(report).items()])


def cmd_stats(args) -> None:
    out = _out_dir(args)
    series, _ = _load_series(args)
    # lags beyond half the span rest on too few pairs to be worth plotting
    half = len(series) // 2
    max_lag = args.acf_max_lag if args.acf_max_lag is not None else min(20 * SECONDS_PER_DAY, half)
    if max_lag > half:
        raise InsufficientDataError(f"acf max lag {max_lag} s exceeds half the series span ({half} s)")
    lags, acf = autocorrelation(series, max_lag, args.acf_stride)
    mean, std = daily_profile(series), daily_std(series)
    write_csv(
        out / "daily.csv",
        ["second_of_day", "mean_hz", "std_hz", "count"],
        ((str(s), mean.values[s], std.values[s], str(int(mean.counts[s]))) for s in range(SECONDS_PER_DAY)),
    )
    write_csv(out / "acf.csv", ["lag_s", "acf"], ((str(int(l)), a) for l, a in zip(lags, acf)))
    summary = []
    for tau in args.tau:
        hist = increment_histogram(series, tau, args.bins)
        write_csv(out / f"increments_tau{tau}.csv", ["bin_center_sigma", "density"], zip(hist.bin_centers, hist.densities))
        summary.append((str(tau), hist.excess_kurtosis, str(hist.n_increments)))
    write_csv(out / "increments_summary.csv", ["tau_s", "excess_kurtosis", "n_increments"], summary)
    st = compute_stats(series)
    write_csv(out / "series_stats.csv", ["mean_hz", "std_hz", "gap_fraction"], [(st.mean_hz, st.std_hz, st.gap_fraction)])


def cmd_forecast(args) -> None:
    out = _out_dir(args)
    series, _ = _load_series(args)
    raw_feature = _load_feature(args.feature) if args.feature else None
    origins = [_parse_epoch(o) for o in args.origin] if args.origin else [series.end_epoch - series.end_epoch % GAMMA]
    for hour in origins:
        if hour % GAMMA:
            raise ConfigurationError(f"forecast hour {hour} is not a full hour")
        history = series.segment(series.start_epoch, min(hour, series.end_epoch))
        library = build_library(history)
        query, gap = query_pattern(history, hour)
        if gap:
            raise GridFreqError(f"observed hour before {hour} contains gaps")
        if args.k is not None:
            k = args.k
        else:
            train, val, _ = chronological_split(history, SplitSpec(0.80, 0.10, 0.10))
            fit_lib = build_library(train)
            val_q, _ = collect_queries(history, val.start_epoch, history.end_epoch)
            k = fit_adaptive_k_model(fit_lib, val_q, per_hour=not args.pooled_k).for_hour(query.hour_of_day)
        if raw_feature is not None:
            fres = block_average(raw_feature, args.feature_resolution) if args.feature_resolution else raw_feature
            scaled = minmax_scale(fres, train_end_epoch=hour - GAMMA)
            flib = build_feature_library(library, scaled, args.alignment)
            fq = feature_window(scaled, hour, args.alignment)
            if fq is None:
                raise GridFreqError(f"no feature window for hour {hour}")
            traj = predict_wnn_extended(library, flib, query, fq, k, args.beta)
        else:
            traj = predict_wnn(library, query, k)
        write_csv(out / f"forecast_{hour}.csv", ["delta_t_s", "predicted_hz"], ((str(d), v) for d, v in zip(traj.delta_t, traj.values)))


def _k_candidates(args):
    return tuple(range(1, args.k_max + 1))


def cmd_evaluate(args) -> None:
    out = _out_dir(args)
    series, _ = _load_series(args)
    feature = _load_feature(args.feature) if args.feature else None
    report = evaluate(
        series,
        SplitSpec(*args.split),
        _k_candidates(args),
        per_hour_k=not args.pooled_k,
        threads=args.threads,
        feature=feature,
        beta=args.beta,
        alignment=args.alignment,
        feature_resolution=args.feature_resolution,
    )
    names = list(report.rmse)
    cols = [f"rmse_{n}_hz" for n in names]
    write_csv(
        out / "evaluate.csv",
        ["delta_t_s"] + cols,
        ([str(i + 1)] + [report.rmse[n].per_dt[i] for n in names] for i in range(GAMMA)),
    )
    write_csv(
        out / "evaluate_minutes.csv",
        ["minute"] + cols,
        ([str(m)] + [report.rmse[n].per_minute[m] for n in names] for m in range(GAMMA // 60)),
    )
    write_csv(
        out / "evaluate_summary.csv",
        ["predictor", "mean_rmse_hz", "rmse_first_5min_hz", "forecasts", "skipped_queries", "leakage_violations"],
        (
            (n, report.rmse[n].overall, report.rmse[n].pooled(1, 300), str(report.forecast_count),
             str(report.skipped_queries), str(report.leakage_violations))
            for n in names
        ),
    )
    write_csv(
        out / "adaptive_k.csv",
        ["delta_t_s", "k_pooled"],
        ((str(i + 1), str(int(k))) for i, k in enumerate(report.adaptive_k.pooled.k_per_dt)),
    )


def cmd_sweep(args) -> None:
    out = _out_dir(args)
    series, _ = _load_series(args)
    rows, notes, leaks = training_size_sweep(
        series, args.intervals_days, args.train_fraction, _k_candidates(args), not args.pooled_k, args.threads
    )
    write_csv(out / "sweep.csv", ["interval_days", "predictor", "mean_rmse_hz"],
              ((str(r.interval_days), r.predictor, r.mean_rmse_hz) for r in rows))
    table = {(r.interval_days, r.predictor): r.mean_rmse_hz for r in rows}
    crossing = next((d for d in sorted({r.interval_days for r in rows})
                     if table[(d, "wnn")] < table[(d, "daily_profile")]), None)
    lines = [f"crossing_interval_days={crossing if crossing is not None else 'none'}", f"leakage_violations={leaks}"]
    lines += [f"note={n}" for n in notes]
    (out / "sweep_notes.txt").write_text("\n".join(lines) + "\n")


def cmd_tune_beta(args) -> None:
    out = _out_dir(args)
    series, _ = _load_series(args)
    result = beta_grid_search(
        series,
        _load_feature(args.feature),
        args.betas,
        SplitSpec(*args.split),
        args.alignment,
        _k_candidates(args),
        not args.pooled_k,
        args.threads,
        args.feature_resolution,
    )
    write_csv(out / "tune_beta.csv", ["beta", "mean_rmse_hz"],
              [(0.0, result.plain_validation_rmse)] + list(zip(result.betas, result.validation_rmse)))
    write_csv(
        out / "tune_beta_summary.csv",
        ["best_beta", "validation_rmse_best_hz", "validation_rmse_plain_hz", "test_rmse_best_hz",
         "test_rmse_plain_hz", "leakage_violations"],
        [(result.best_beta, result.validation_rmse.min(), result.plain_validation_rmse, result.test_rmse_best,
          result.test_rmse_plain, str(result.leakage_violations))],
    )


# --- parser ----------------------------------------------------------------


def _data_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="frequency CSV (timestamp,frequency_hz)")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--nominal-hz", type=float, default=50.0)
    p.add_argument("--outlier-threshold", type=float, default=DEFAULT_OUTLIER_HZ,
                   help="mask |f - nominal| above this (Hz); 0 disables")


def _model_options(p: argparse.ArgumentParser, split: bool = True) -> None:
    if split:
        p.add_argument("--split", type=float, nargs=3, default=[0.70, 0.15, 0.15], metavar=("TRAIN", "VAL", "TEST"))
    p.add_argument("--k-max", type=int, default=50, help="adaptive k candidates are 1..K")
    p.add_argument("--pooled-k", action="store_true", help="one adaptive-k vector for all hours")
    p.add_argument("--threads", type=int, default=1)


def _feature_options(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--feature", required=required, help="feature CSV (timestamp,value)")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--alignment", choices=["past", "forecast", "past-hour", "forecast-hour"], default="forecast")
    p.add_argument("--feature-resolution", type=int, default=None, help="block-average the feature to this many seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridfreq", description=__doc__)
    parser.add_argument("--config", help="key=value file; command-line flags take precedence")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic frequency (and feature) CSV")
    p.add_argument("--days", type=int, default=90)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--feature-out")
    p.add_argument("--coupling", type=float, default=1.0)
    p.add_argument("--jump-jitter", type=float, default=SynthSpec.jump_jitter)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="regularize and clean a frequency CSV")
    _data_options(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="daily profile/std, autocorrelation, increment histograms")
    _data_options(p)
    p.add_argument("--acf-max-lag", type=int, default=None, help="seconds (default: 20 days or series length)")
    p.add_argument("--acf-stride", type=int, default=60)
    p.add_argument("--tau", type=int, nargs="+", default=[1, 10])
    p.add_argument("--bins", type=int, default=101)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("forecast", help="WNN forecast of the next hour")
    _data_options(p)
    p.add_argument("--origin", nargs="+", help="prediction hour(s), UNIX seconds or RFC 3339 (default: after data end)")
    p.add_argument("--k", type=int, default=None, help="fixed k (default: adaptive k fitted on recent history)")
    p.add_argument("--pooled-k", action="store_true")
    _feature_options(p)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("evaluate", help="test RMSE per offset for constant, daily profile and WNN")
    _data_options(p)
    _model_options(p)
    _feature_options(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="validation RMSE versus training interval length")
    _data_options(p)
    _model_options(p, split=False)
    p.add_argument("--intervals-days", type=int, nargs="+", default=[7, 14, 28, 56])
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tune-beta", help="grid search of the feature weight beta")
    _data_options(p)
    _model_options(p)
    _feature_options(p, required=True)
    p.add_argument("--betas", type=float, nargs="+", default=list(DEFAULT_BETAS))
    p.set_defaults(func=cmd_tune_beta)
    return parser


def _apply_config(parser: argparse.ArgumentParser, path: str, command: str) -> None:
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[command]
    actions = {a.dest: a for a in sub._actions}
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        parser.error(f"cannot read config {path}: {exc}")
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.error(f"config line without '=': {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        dest = key.lstrip("-").replace("-", "_")
        action = actions.get(dest)
        if action is None or dest in ("help",):
            parser.error(f"unknown config key {key!r} for {command}")
        conv = action.type or str
        if isinstance(action, argparse._StoreTrueAction):
            values[dest] = val.lower() in ("1", "true", "yes", "on")
        elif action.nargs in ("+", "*") or isinstance(action.nargs, int):
            values[dest] = [conv(v) for v in val.replace(",", " ").split()]
        else:
            values[dest] = conv(val)
    for a in sub._actions:
        if a.dest in values:
            a.required = False
    sub.set_defaults(**values)


def run(argv: Sequence[str] | None = None) -> int:
    """Execute one subcommand; returns 0 on success, 1 on data errors, 2 on usage errors."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config")
        known, rest = pre.parse_known_args(argv)
        command = next((t for t in rest if t in COMMANDS), None)
        if known.config and command:
            _apply_config(parser, known.config, command)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
        status, code = "ok", 0
    except (GridFreqError, ValueError, OSError) as exc:
        status = f"error: {type(exc).__name__}: {' '.join(str(exc).split())}"
        print(status, file=sys.stderr)
        code = 1
    try:
        write_manifest(args, status)
    except OSError as exc:
        print(f"error: {type(exc).__name__}: manifest not written: {exc}", file=sys.stderr)
        code = code or 1
    return code


def main() -> None:
    sys.exit(run())
