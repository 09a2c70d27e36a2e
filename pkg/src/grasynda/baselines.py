"""Baseline augmenters: jitter, scaling, warps, MBB, DBA, TSMixup.

Every augmenter maps source series to synthetic ones under the shared
seeded-RNG regime, so a fixed seed always reproduces the same output.
``augment`` is the single dispatch point that also covers the graph
generator and the identity ("none") method.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.interpolate import make_interp_spline

from grasynda.core import (
    DataError,
    SeriesCollection,
    TimeSeries,
    build_augmented_set,
    substream,
)
from grasynda.generator import GeneratorConfig, SyntheticSeries, grasynda, synthetic_id
from grasynda.stl import recombine, stl_decompose

__all__ = [
    "AugmenterSpec",
    "METHODS",
    "jitter",
    "scaling",
    "magnitude_warp",
    "time_warp",
    "mbb",
    "dba",
    "tsmixup",
    "dtw_path",
    "dtw_distance",
    "dba_barycenter",
    "augment",
]

METHODS = (
    "jitter",
    "scaling",
    "m_warp",
    "t_warp",
    "mbb",
    "dba",
    "tsmixup",
    "grasynda",
    "none",
)

# Defaults follow the conventions of the augmentation literature; all are
# overridable through AugmenterSpec.params. mbb's block_length of None is
# resolved per series as 2*period.
DEFAULT_PARAMS: dict[str, dict] = {
    "jitter": {"sigma": 0.03},
    "scaling": {"sigma": 0.1},
    "m_warp": {"sigma": 0.2, "knots": 4},
    "t_warp": {"sigma": 0.2, "knots": 4},
    "mbb": {"block_length": None},
    "dba": {"n_refs": 5, "iterations": 10},
    "tsmixup": {"max_k": 3, "alpha": 1.5},
    "grasynda": {"quantiles": 25, "use_stl": None},
    "none": {},
}


@dataclass(frozen=True)
class AugmenterSpec:
    """Which method to run, with what parameters, under which seed."""

    method: str
    params: Mapping[str, object] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise DataError(f"unknown augmenter {self.method!r}; choose from {METHODS}")
        known = DEFAULT_PARAMS[self.method]
        for key in self.params:
            if key not in known:
                raise DataError(f"unknown {self.method} parameter {key!r}")
        merged = self.resolved()
        sigma = merged.get("sigma")
        if sigma is not None and not sigma > 0:
            raise DataError(f"{self.method}: sigma must be > 0, got {sigma}")
        knots = merged.get("knots")
        if knots is not None and knots < 2:
            raise DataError(f"{self.method}: knots must be >= 2, got {knots}")
        block = merged.get("block_length")
        if block is not None and block < 1:
            raise DataError(f"mbb: block_length must be >= 1, got {block}")
        if self.method == "dba" and merged["n_refs"] < 2:
            raise DataError(f"dba: n_refs must be >= 2, got {merged['n_refs']}")
        if self.method == "tsmixup":
            if merged["max_k"] < 1:
                raise DataError(f"tsmixup: max_k must be >= 1, got {merged['max_k']}")
            if not merged["alpha"] > 0:
                raise DataError(f"tsmixup: alpha must be > 0, got {merged['alpha']}")

    def resolved(self) -> dict:
        merged = dict(DEFAULT_PARAMS[self.method])
        merged.update(self.params)
        return merged


# --- per-series transformations ---------------------------------------------


def jitter(series: TimeSeries, sigma: float, rng: np.random.Generator) -> SyntheticSeries:
    """Add Gaussian noise with scale sigma * sd(series) to every point."""
    scale = sigma * float(np.std(series.values))
    values = series.values + rng.normal(0.0, scale, size=len(series))
    return SyntheticSeries(synthetic_id(series.id, 1), values, series.id)


def scaling(series: TimeSeries, sigma: float, rng: np.random.Generator) -> SyntheticSeries:
    """Multiply the whole series by one factor ~ Normal(1, sigma), kept > 0."""
    factor = 1.0 + sigma * rng.standard_normal()
    while factor <= 0:
        factor = 1.0 + sigma * rng.standard_normal()
    return SyntheticSeries(synthetic_id(series.id, 1), factor * series.values, series.id)


def _smooth_curve(length: int, knots: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Cubic spline through `knots` ordinates ~ N(1, sigma) on [0, length-1]."""
    xk = np.linspace(0.0, length - 1.0, knots)
    yk = 1.0 + sigma * rng.standard_normal(knots)
    spline = make_interp_spline(xk, yk, k=min(3, knots - 1))
    return spline(np.arange(length, dtype=np.float64))


def magnitude_warp(
    series: TimeSeries, sigma: float, knots: int, rng: np.random.Generator
) -> SyntheticSeries:
    """Multiply by a smooth random curve around 1."""
    if len(series) < 2:
        raise DataError(f"series {series.id!r}: magnitude warp needs T >= 2")
    curve = _smooth_curve(len(series), knots, sigma, rng)
    return SyntheticSeries(synthetic_id(series.id, 1), series.values * curve, series.id)


def warp_grid(length: int, knots: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Strictly increasing warped time axis over [0, length-1].

    Per-step speeds come from a cubic spline around 1, clamped positive
    and accumulated, then normalized so the axis ends exactly at
    length-1 with both endpoints pinned.
    """
    speeds = np.maximum(_smooth_curve(length, knots, sigma, rng)[1:], 1e-6)
    grid = np.concatenate(([0.0], np.cumsum(speeds)))
    grid *= (length - 1.0) / grid[-1]
    grid[-1] = length - 1.0
    return grid


def time_warp(
    series: TimeSeries, sigma: float, knots: int, rng: np.random.Generator
) -> SyntheticSeries:
    """Resample the series on a smoothly distorted, strictly monotone grid."""
    T = len(series)
    if T < 2:
        raise DataError(f"series {series.id!r}: time warp needs T >= 2")
    grid = warp_grid(T, knots, sigma, rng)
    values = np.interp(grid, np.arange(T, dtype=np.float64), series.values)
    return SyntheticSeries(synthetic_id(series.id, 1), values, series.id)


def mbb(
    series: TimeSeries, block_length: int | None, rng: np.random.Generator
) -> SyntheticSeries:
    """Moving block bootstrap of the STL remainder, then recombine.

    Draws overlapping remainder blocks of the given length uniformly
    with replacement, concatenates them, truncates to T and adds back
    the original trend and seasonal components. Defaults to blocks of
    two seasonal cycles.
    """
    decomposition = stl_decompose(series)
    T = len(series)
    L = 2 * series.period if block_length is None else int(block_length)
    if not 1 <= L <= T:
        raise DataError(
            f"series {series.id!r}: block_length must be in 1..{T}, got {L}"
        )
    n_blocks = T - L + 1
    starts = rng.integers(0, n_blocks, size=-(-T // L))
    remainder = decomposition.remainder
    boot = np.concatenate([remainder[s : s + L] for s in starts])[:T]
    values = recombine(decomposition, boot)
    return SyntheticSeries(synthetic_id(series.id, 1), values, series.id)


# --- DTW and barycenter averaging --------------------------------------------


def _dtw_cost(a: np.ndarray, b: np.ndarray, window: int | None) -> np.ndarray:
    """Accumulated squared-difference cost matrix, (n+1) x (m+1)."""
    n, m = len(a), len(b)
    D = np.full((n + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, n + 1):
        lo, hi = 1, m
        if window is not None:
            lo = max(1, i - window)
            hi = min(m, i + window)
        for j in range(lo, hi + 1):
            c = (a[i - 1] - b[j - 1]) ** 2
            D[i, j] = c + min(D[i - 1, j - 1], D[i - 1, j], D[i, j - 1])
    return D


def dtw_distance(a, b, window: int | None = None) -> float:
    """DTW distance with squared local costs (square root of the total)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.sqrt(_dtw_cost(a, b, window)[len(a), len(b)]))


def dtw_path(a, b, window: int | None = None) -> list[tuple[int, int]]:
    """Optimal alignment path as 0-based (i, j) pairs, diagonal-preferring."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    D = _dtw_cost(a, b, window)
    i, j = len(a), len(b)
    path = [(i - 1, j - 1)]
    while i > 1 or j > 1:
        options = []
        if i > 1 and j > 1:
            options.append((D[i - 1, j - 1], i - 1, j - 1))
        if i > 1:
            options.append((D[i - 1, j], i - 1, j))
        if j > 1:
            options.append((D[i, j - 1], i, j - 1))
        _, i, j = min(options, key=lambda t: t[0])  # ties resolve to the diagonal
        path.append((i - 1, j - 1))
    path.reverse()
    return path


def dba_barycenter(
    reference: np.ndarray,
    neighbors: Sequence[np.ndarray],
    iterations: int = 10,
    window: int | None = None,
) -> np.ndarray:
    """Iterative barycenter averaging, initialized with the reference.

    Each pass aligns every participant to the current center by DTW and
    replaces each center point by the mean of the values aligned to it.
    Stops early once the center no longer moves.
    """
    center = np.asarray(reference, dtype=np.float64).copy()
    participants = [np.asarray(reference, dtype=np.float64)]
    participants += [np.asarray(s, dtype=np.float64) for s in neighbors]
    for _ in range(iterations):
        sums = np.zeros_like(center)
        counts = np.zeros_like(center)
        for seq in participants:
            for i, j in dtw_path(center, seq, window):
                sums[i] += seq[j]
                counts[i] += 1.0
        updated = sums / counts
        if np.allclose(updated, center, rtol=0.0, atol=1e-12):
            center = updated
            break
        center = updated
    return center


def dba(
    collection: SeriesCollection,
    n_refs: int,
    rng: np.random.Generator,
    iterations: int = 10,
    window: int | None = None,
) -> list[SyntheticSeries]:
    """One DTW barycenter per series, averaging it with sampled neighbors.

    Each output uses its source series as the reference and draws
    n_refs - 1 distinct neighbors (fewer when the collection is small).
    Participants are truncated to their common length, keeping the most
    recent values, so the output length equals the reference length
    after truncation.
    """
    if len(collection) < 2:
        raise DataError("dba needs a collection with at least 2 series")
    streams = rng.spawn(len(collection))
    out = []
    for i, series in enumerate(collection.series):
        r = streams[i]
        pool = [j for j in range(len(collection)) if j != i]
        take = min(n_refs - 1, len(pool))
        chosen = r.choice(len(pool), size=take, replace=False)
        participants = [series] + [collection.series[pool[j]] for j in chosen]
        L = min(len(p) for p in participants)
        arrays = [p.values[-L:] for p in participants]
        center = dba_barycenter(arrays[0], arrays[1:], iterations=iterations, window=window)
        out.append(SyntheticSeries(synthetic_id(series.id, 1), center, series.id))
    return out


# --- TSMixup ------------------------------------------------------------------


def _zscore(values: np.ndarray) -> np.ndarray:
    sd = float(np.std(values))
    if sd < 1e-12:
        return np.zeros_like(values)
    return (values - float(np.mean(values))) / sd


def tsmixup(
    collection: SeriesCollection,
    max_k: int,
    alpha: float,
    rng: np.random.Generator,
) -> list[SyntheticSeries]:
    """Dirichlet-weighted averages of z-normalized series segments.

    For each output, k ~ Uniform{1..max_k} series take part (the source
    plus k-1 sampled companions), cropped to the shortest participant
    (most recent values kept), z-scored, and mixed with weights from a
    symmetric Dirichlet(alpha). Outputs stay in normalized scale.
    """
    streams = rng.spawn(len(collection))
    out = []
    for i, series in enumerate(collection.series):
        r = streams[i]
        k = int(r.integers(1, max_k + 1))
        pool = [j for j in range(len(collection)) if j != i]
        take = min(k - 1, len(pool))
        chosen = r.choice(len(pool), size=take, replace=False) if pool else []
        participants = [series] + [collection.series[pool[j]] for j in chosen]
        L = min(len(p) for p in participants)
        segments = np.stack([_zscore(p.values[-L:]) for p in participants])
        weights = r.dirichlet(np.full(len(participants), alpha))
        values = weights @ segments
        out.append(SyntheticSeries(synthetic_id(series.id, 1), values, series.id))
    return out


# --- dispatch -----------------------------------------------------------------

_PER_SERIES = {"jitter", "scaling", "m_warp", "t_warp", "mbb", "grasynda"}


def _one_synthetic(series: TimeSeries, spec: AugmenterSpec, params: dict) -> SyntheticSeries:
    if spec.method == "grasynda":
        config = GeneratorConfig(
            seed=spec.seed,
            quantiles=int(params["quantiles"]),
            use_stl=params["use_stl"],
        )
        return grasynda(series, config)[0]
    rng = substream(spec.seed, spec.method, series.id, 1)
    if spec.method == "jitter":
        return jitter(series, params["sigma"], rng)
    if spec.method == "scaling":
        return scaling(series, params["sigma"], rng)
    if spec.method == "m_warp":
        return magnitude_warp(series, params["sigma"], int(params["knots"]), rng)
    if spec.method == "t_warp":
        return time_warp(series, params["sigma"], int(params["knots"]), rng)
    if spec.method == "mbb":
        block = params["block_length"]
        return mbb(series, None if block is None else int(block), rng)
    raise DataError(f"not a per-series method: {spec.method!r}")


def augment(
    collection: SeriesCollection, spec: AugmenterSpec, threads: int = 1
) -> SeriesCollection:
    """Produce one synthetic per original and return the combined set.

    ``none`` returns the input untouched. Every other method appends N
    synthetic series, so the result has 2N members. Determinism: each
    synthetic is generated on a substream keyed by (seed, method,
    source id), so results do not depend on thread count or ordering.
    """
    if spec.method == "none":
        return collection
    params = spec.resolved()

    if spec.method in _PER_SERIES:
        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as pool:
                synthetic = list(
                    pool.map(lambda s: _one_synthetic(s, spec, params), collection.series)
                )
        else:
            synthetic = [_one_synthetic(s, spec, params) for s in collection.series]
    elif spec.method == "dba":
        synthetic = dba(
            collection,
            n_refs=int(params["n_refs"]),
            rng=substream(spec.seed, "dba"),
            iterations=int(params["iterations"]),
        )
    elif spec.method == "tsmixup":
        synthetic = tsmixup(
            collection,
            max_k=int(params["max_k"]),
            alpha=float(params["alpha"]),
            rng=substream(spec.seed, "tsmixup"),
        )
    else:  # pragma: no cover - METHODS is exhaustive
        raise DataError(f"unhandled method {spec.method!r}")

    period_of = {s.id: s.period for s in collection.series}
    as_series = [
        TimeSeries(syn.id, period_of[syn.source_id], syn.values) for syn in synthetic
    ]
    return build_augmented_set(collection, as_series)
