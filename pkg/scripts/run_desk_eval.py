#!/usr/bin/env python3
"""Desk-scale augmenter benchmark on one or more corpora.

Runs every augmenter (plus the no-augmentation baseline) through the
train/forecast/MASE grid with the global ridge model and the seasonal
naive, then prints the aligned report table and writes report files.

    python scripts/run_desk_eval.py demo_monthly.csv --out results/
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from grasynda import AugmenterSpec, load_collection
from grasynda.baselines import METHODS
from grasynda.evaluation import run_grid

DEFAULT_METHODS = [m for m in METHODS if m != "none"]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("corpora", nargs="+", type=Path, help="long-format CSV files")
    parser.add_argument("--out", type=Path, default=Path("desk-eval"))
    parser.add_argument("--methods", default="none," + ",".join(DEFAULT_METHODS))
    parser.add_argument("--forecasters", default="linear,snaive")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--ridge-lambda", type=float, default=1.0)
    args = parser.parse_args()

    datasets = [load_collection(path) for path in args.corpora]
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    forecasters = [f.strip() for f in args.forecasters.split(",") if f.strip()]
    specs = [AugmenterSpec(m, seed=args.seed) for m in methods]

    start = time.perf_counter()
    records, report = run_grid(datasets, specs, forecasters, args.ridge_lambda)
    elapsed = time.perf_counter() - start

    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "report.csv").write_text(report.to_csv_text(), encoding="utf-8")
    (args.out / "report.txt").write_text(report.to_table_text(), encoding="utf-8")
    print(report.to_table_text())
    print(f"{len(records)} per-series scores in {elapsed:.1f}s -> {args.out}/report.csv")


if __name__ == "__main__":
    main()
