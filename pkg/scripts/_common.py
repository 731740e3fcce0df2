"""Shared argument handling: analyse a frequency CSV or a fresh synthetic record."""
import argparse
from pathlib import Path

from gridfreq.ingest import parse_feature_csv, parse_frequency_csv
from gridfreq.synth import SynthSpec, generate, generate_feature


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--input", help="frequency CSV; omit to use synthetic data")
    p.add_argument("--feature", help="feature CSV (only with --input)")
    p.add_argument("--days", type=int, default=90, help="synthetic record length")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--coupling", type=float, default=1.0, help="synthetic feature coupling")
    p.add_argument("--out-dir", default="results")
    return p


def load(args):
    """Return (series, raw feature or None, output directory)."""
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.input:
        with open(args.input, newline="") as fh:
            series, _ = parse_frequency_csv(fh)
        feature = None
        if args.feature:
            with open(args.feature, newline="") as fh:
                feature, _ = parse_feature_csv(fh)
        return series, feature, out
    spec = SynthSpec(days=args.days, seed=args.seed)
    return generate(spec), generate_feature(spec, coupling=args.coupling), out
