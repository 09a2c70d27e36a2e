"""Shared fixtures and corpus builders for the test suite."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest
from scipy.signal import lfilter

from grasynda import SeriesCollection, TimeSeries


def data_file(name: str) -> Path | None:
    """Locate an optional real corpus: $GRASYNDA_DATA_DIR first, then ./data."""
    candidates = []
    env = os.environ.get("GRASYNDA_DATA_DIR")
    if env:
        candidates.append(Path(env) / name)
    candidates.append(Path(__file__).resolve().parent.parent / "data" / name)
    for path in candidates:
        if path.exists():
            return path
    return None


def seasonal_ar_collection(
    n_series: int = 50,
    length: int = 72,
    period: int = 12,
    seed: int = 0,
    horizon: int = 12,
    input_window: int = 24,
    name: str = "desk-corpus",
) -> SeriesCollection:
    """Corpus of level + trend + sinusoidal seasonality + AR(1) noise."""
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
    return SeriesCollection(name, series, horizon, input_window)


def random_series(rng: np.random.Generator, length: int, period: int = 1) -> TimeSeries:
    values = rng.normal(0.0, 1.0, size=length).cumsum() + rng.uniform(-50, 50)
    return TimeSeries(f"R{rng.integers(1 << 30)}", period, values)


@pytest.fixture
def small_collection() -> SeriesCollection:
    return seasonal_ar_collection(n_series=4, length=48, seed=11, name="small")
