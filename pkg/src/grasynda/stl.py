"""Additive seasonal-trend decomposition via LOESS.

Splits a series into trend + seasonal + remainder so that generation
can run on the (roughly stationary) remainder and the synthetic
remainder can be recombined with the original trend and seasonality.

The smoother is the classic LOESS-based STL with its canonical
defaults: seasonal window 7, automatic trend window (smallest odd
integer >= 1.5*period / (1 - 1.5/7)), locally linear fits with tricube
weights, two inner iterations and one bisquare robustness iteration. A
final normalization pass moves per-cycle seasonal means into the trend
so every complete cycle of the seasonal component averages to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from statsmodels.tsa.seasonal import STL as _LoessSTL

from grasynda.core import DataError, TimeSeries

__all__ = ["StlParams", "StlDecomposition", "stl_decompose", "recombine"]


@dataclass(frozen=True)
class StlParams:
    seasonal_window: int = 7
    trend_window: int | None = None  # None: smallest odd >= 1.5*period/(1 - 1.5/seasonal)
    inner_iterations: int = 2
    outer_iterations: int = 1


@dataclass(frozen=True, eq=False)
class StlDecomposition:
    """Trend/seasonal/remainder triple; the three always sum to the input."""

    trend: np.ndarray
    seasonal: np.ndarray
    remainder: np.ndarray
    period: int

    def __post_init__(self):
        for attr in ("trend", "seasonal", "remainder"):
            arr = np.asarray(getattr(self, attr), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, attr, arr)
        n = self.trend.size
        if self.seasonal.size != n or self.remainder.size != n:
            raise DataError("decomposition components must share one length")

    def __len__(self) -> int:
        return self.trend.size


def stl_decompose(series: TimeSeries, params: StlParams = StlParams()) -> StlDecomposition:
    """Decompose one series additively into trend, seasonal, remainder.

    Requires period >= 2 and at least two full seasonal cycles.
    """
    m = series.period
    T = len(series)
    if m < 2:
        raise DataError(f"series {series.id!r}: STL needs period >= 2, got {m}")
    if T < 2 * m:
        raise DataError(
            f"series {series.id!r} too short for STL: T={T} < 2*period={2 * m}"
        )
    fit = _LoessSTL(
        series.values,
        period=m,
        seasonal=params.seasonal_window,
        trend=params.trend_window,
        robust=params.outer_iterations > 0,
    ).fit(inner_iter=params.inner_iterations, outer_iter=params.outer_iterations)

    trend = np.array(fit.trend, dtype=np.float64)
    seasonal = np.array(fit.seasonal, dtype=np.float64)
    # Zero-center the seasonal over each complete cycle; the shift moves
    # into the trend so the additive identity is untouched.
    for c in range(T // m):
        cycle = slice(c * m, (c + 1) * m)
        mu = seasonal[cycle].mean()
        seasonal[cycle] -= mu
        trend[cycle] += mu
    remainder = series.values - trend - seasonal
    return StlDecomposition(trend=trend, seasonal=seasonal, remainder=remainder, period=m)


def recombine(decomposition: StlDecomposition, new_remainder) -> np.ndarray:
    """trend + seasonal + new_remainder, the inverse of decomposition."""
    new_remainder = np.asarray(new_remainder, dtype=np.float64)
    if new_remainder.size != len(decomposition):
        raise DataError(
            f"remainder length mismatch: got {new_remainder.size}, "
            f"expected {len(decomposition)}"
        )
    return decomposition.trend + decomposition.seasonal + new_remainder
