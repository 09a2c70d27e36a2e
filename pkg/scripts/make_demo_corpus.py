#!/usr/bin/env python3
"""Write a synthetic demo corpus (long CSV) for exercising the CLI.

Each series is level + linear trend + sinusoidal seasonality + AR(1)
noise, so both the decomposition path and the augmenters have something
realistic to chew on.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from grasynda import SeriesCollection, TimeSeries, save_collection


def build_corpus(n_series, length, period, seed, name):
    rng = np.random.default_rng(seed)
    t = np.arange(length, dtype=np.float64)
    series = []
    for i in range(n_series):
        level = rng.uniform(20.0, 80.0)
        slope = rng.uniform(-0.2, 0.4)
        amplitude = rng.uniform(2.0, 8.0)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        phi = rng.uniform(0.3, 0.7)
        shocks = rng.normal(0.0, rng.uniform(0.5, 2.0), size=length)
        ar = lfilter([1.0], [1.0, -phi], shocks)
        y = level + slope * t + amplitude * np.sin(2.0 * np.pi * t / period + phase) + ar
        series.append(TimeSeries(f"S{i:03d}", period, y))
    horizon, window = (12, 24) if period == 12 else (8, 8)
    return SeriesCollection(name, series, horizon, window)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("demo_monthly.csv"))
    parser.add_argument("--n-series", type=int, default=50)
    parser.add_argument("--length", type=int, default=72)
    parser.add_argument("--period", type=int, default=12)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    corpus = build_corpus(args.n_series, args.length, args.period, args.seed, args.out.stem)
    save_collection(corpus, args.out)
    total = sum(len(s) for s in corpus)
    print(f"wrote {args.out}: {len(corpus)} series, {total} observations")


if __name__ == "__main__":
    main()
