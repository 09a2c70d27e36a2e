"""Forecasters, MASE scoring, and report aggregation.

The harness evaluates augmenters by a downstream forecasting task: hold
out the final h points of each series, train on the (possibly
augmented) remainder, forecast, and score with MASE. Reports aggregate
per-cell means, per-forecaster averages and ranks, Wilcoxon
significance against the no-augmentation baseline, and the fraction of
cells where each method beats that baseline.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.stats import rankdata

from grasynda.core import DataError, SeriesCollection, TimeSeries, split
from grasynda.baselines import AugmenterSpec, augment

__all__ = [
    "ForecastResult",
    "ScoreRecord",
    "EvaluationReport",
    "seasonal_naive",
    "GlobalLinearModel",
    "fit_global_linear",
    "mase",
    "wilcoxon_signed_rank",
    "aggregate_report",
    "evaluate_collection",
    "run_grid",
    "BASELINE_METHOD",
]

BASELINE_METHOD = "none"


@dataclass(frozen=True, eq=False)
class ForecastResult:
    series_id: str
    predictions: np.ndarray
    actuals: np.ndarray

    def __post_init__(self):
        for attr in ("predictions", "actuals"):
            arr = np.asarray(getattr(self, attr), dtype=np.float64)
            arr.flags.writeable = False
            object.__setattr__(self, attr, arr)
        if self.predictions.size != self.actuals.size:
            raise DataError(
                f"{self.series_id!r}: predictions and actuals must have equal length"
            )
        if not (np.all(np.isfinite(self.predictions)) and np.all(np.isfinite(self.actuals))):
            raise DataError(f"{self.series_id!r}: non-finite forecast values")


class ScoreRecord(NamedTuple):
    dataset: str
    forecaster: str
    method: str
    series_id: str
    score: float


# --- forecasters --------------------------------------------------------------


def seasonal_naive(train: TimeSeries, h: int) -> np.ndarray:
    """Repeat the last observed seasonal cycle across the horizon."""
    m = train.period
    T = len(train)
    if T < m:
        raise DataError(
            f"series {train.id!r}: seasonal naive needs T >= period ({T} < {m})"
        )
    idx = T - m + (np.arange(h) % m)
    return train.values[idx]


@dataclass(frozen=True, eq=False)
class GlobalLinearModel:
    """Ridge AR model over per-window z-normalized lag windows.

    ``weights`` maps a normalized input window (length l) to h
    normalized outputs; predictions are denormalized with the window's
    own mean and standard deviation.
    """

    weights: np.ndarray
    input_window: int
    horizon: int
    ridge_lambda: float
    train_rss: float

    def __post_init__(self):
        arr = np.asarray(self.weights, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "weights", arr)

    def predict(self, window) -> np.ndarray:
        window = np.asarray(window, dtype=np.float64)
        if window.size != self.input_window:
            raise DataError(
                f"expected window of length {self.input_window}, got {window.size}"
            )
        mu = float(np.mean(window))
        sd = float(np.std(window))
        if sd < 1e-12:
            sd = 1.0
        normalized = (window - mu) / sd
        return mu + sd * (normalized @ self.weights)


def _window_matrix(collection: SeriesCollection, l: int, h: int):
    xs, ys = [], []
    for s in collection.series:
        v = s.values
        for t in range(len(v) - l - h + 1):
            xs.append(v[t : t + l])
            ys.append(v[t + l : t + l + h])
    if not xs:
        raise DataError(
            f"collection {collection.name!r}: no series long enough for "
            f"input_window={l} plus horizon={h}"
        )
    X = np.asarray(xs)
    Y = np.asarray(ys)
    mu = X.mean(axis=1, keepdims=True)
    sd = X.std(axis=1, keepdims=True)
    sd = np.where(sd < 1e-12, 1.0, sd)
    return (X - mu) / sd, (Y - mu) / sd


def fit_global_linear(
    collection: SeriesCollection,
    l: int | None = None,
    h: int | None = None,
    ridge_lambda: float = 1.0,
) -> GlobalLinearModel:
    """Fit one ridge model on lag windows pooled from every series.

    Solves the normal equations (X'X + lambda I) W = X'Y directly; with
    lambda = 0 a singular system raises with a hint to regularize.
    """
    l = collection.input_window if l is None else int(l)
    h = collection.horizon if h is None else int(h)
    if ridge_lambda < 0:
        raise DataError(f"ridge_lambda must be >= 0, got {ridge_lambda}")
    X, Y = _window_matrix(collection, l, h)
    gram = X.T @ X + ridge_lambda * np.eye(l)
    try:
        W = np.linalg.solve(gram, X.T @ Y)
    except np.linalg.LinAlgError:
        raise DataError(
            "normal equations are singular; refit with ridge_lambda > 0"
        ) from None
    if not np.all(np.isfinite(W)):
        raise DataError("normal equations are singular; refit with ridge_lambda > 0")
    rss = float(np.sum((X @ W - Y) ** 2))
    return GlobalLinearModel(
        weights=W, input_window=l, horizon=h, ridge_lambda=float(ridge_lambda), train_rss=rss
    )


# --- scoring ------------------------------------------------------------------


def mase(predictions, actuals, train: TimeSeries) -> float:
    """Mean absolute scaled error.

    MAE of the forecast over the horizon, divided by the in-sample MAE
    of the one-step naive forecast on the training portion. A constant
    training series makes the score undefined; it returns NaN with a
    warning so aggregation can drop it.
    """
    predictions = np.asarray(predictions, dtype=np.float64)
    actuals = np.asarray(actuals, dtype=np.float64)
    if predictions.size != actuals.size:
        raise DataError("predictions and actuals must have equal length")
    if len(train) < 2:
        raise DataError(f"series {train.id!r}: MASE needs a training length >= 2")
    naive_mae = float(np.mean(np.abs(np.diff(train.values))))
    if naive_mae == 0.0:
        warnings.warn(
            f"series {train.id!r}: constant training series, MASE undefined",
            stacklevel=2,
        )
        return float("nan")
    return float(np.mean(np.abs(predictions - actuals))) / naive_mae


def _signed_rank_stat(diffs: np.ndarray):
    ranks = rankdata(np.abs(diffs), method="average")
    return float(ranks[diffs > 0].sum()), ranks


def _exact_p(w_plus: float, ranks: np.ndarray, n: int) -> float:
    # Distribution of W+ over all 2^n sign assignments, via subset-sum
    # counting on doubled ranks (ties make ranks half-integral).
    scaled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(scaled.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in scaled:
        shifted = counts.copy()
        shifted[r:] += counts[: total + 1 - r]
        counts = shifted
    denom = 2.0**n
    w2 = int(round(2.0 * w_plus))
    cdf = counts[: w2 + 1].sum() / denom
    sf = counts[w2:].sum() / denom
    return min(1.0, 2.0 * min(cdf, sf))


def _normal_p(w_plus: float, ranks: np.ndarray, n: int) -> float:
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    # tie correction on the rank variance
    _, tie_counts = np.unique(ranks, return_counts=True)
    var -= float(np.sum(tie_counts**3 - tie_counts)) / 48.0
    d = w_plus - mean
    z = (d - 0.5 * np.sign(d)) / math.sqrt(var)
    return math.erfc(abs(z) / math.sqrt(2.0))


def wilcoxon_signed_rank(paired_scores_a, paired_scores_b) -> float:
    """Two-sided Wilcoxon signed-rank p-value on paired samples.

    Zero differences are dropped; ties in |difference| get average
    ranks. Uses the exact sign-assignment distribution up to n = 25 and
    the normal approximation with continuity correction beyond.
    """
    a = np.asarray(paired_scores_a, dtype=np.float64)
    b = np.asarray(paired_scores_b, dtype=np.float64)
    if a.size != b.size:
        raise DataError("paired samples must have equal length")
    diffs = a - b
    diffs = diffs[diffs != 0.0]
    n = diffs.size
    if n == 0:
        return 1.0
    if n < 5:
        raise DataError(f"need at least 5 non-zero differences, got {n}")
    w_plus, ranks = _signed_rank_stat(diffs)
    if n <= 25:
        return _exact_p(w_plus, ranks, n)
    return _normal_p(w_plus, ranks, n)


# --- report aggregation ---------------------------------------------------------


@dataclass(eq=False)
class EvaluationReport:
    """Aggregated grid of per-cell MASE means, ranks and significance.

    Cells are keyed by (dataset, forecaster, method). ``avg_mase`` and
    ``avg_rank`` are keyed by (forecaster, method) and average over
    datasets with a populated cell. ``effectiveness`` is, per method,
    the fraction of (dataset, forecaster) cells beating the baseline
    method; None for the baseline itself or when no baseline ran.
    """

    datasets: tuple[str, ...]
    forecasters: tuple[str, ...]
    methods: tuple[str, ...]
    cell_mean: dict = field(default_factory=dict)
    cell_rank: dict = field(default_factory=dict)
    cell_p: dict = field(default_factory=dict)
    cell_significant: dict = field(default_factory=dict)
    avg_mase: dict = field(default_factory=dict)
    avg_rank: dict = field(default_factory=dict)
    effectiveness: dict = field(default_factory=dict)
    gaps: tuple = ()

    def to_csv_text(self) -> str:
        lines = ["dataset,forecaster,method,mean_mase,rank,p_value"]
        for d in self.datasets:
            for f in self.forecasters:
                for m in self.methods:
                    key = (d, f, m)
                    if key not in self.cell_mean:
                        continue
                    p = self.cell_p.get(key)
                    lines.append(
                        f"{d},{f},{m},{self.cell_mean[key]!r},"
                        f"{self.cell_rank[key]!r},{'' if p is None else repr(p)}"
                    )
        return "\n".join(lines) + "\n"

    def to_table_text(self) -> str:
        """Aligned text table: one block per forecaster, methods as columns."""

        def fmt(value, star=False):
            if value is None:
                return "--"
            return f"{value:.6g}" + ("*" if star else "")

        header = ["forecaster", "dataset"] + list(self.methods)
        rows = [header]
        for f in self.forecasters:
            for d in self.datasets:
                row = [f, d]
                for m in self.methods:
                    key = (d, f, m)
                    row.append(
                        fmt(self.cell_mean.get(key), self.cell_significant.get(key, False))
                    )
                rows.append(row)
            rows.append(
                [f, "Avg."] + [fmt(self.avg_mase.get((f, m))) for m in self.methods]
            )
            rows.append(
                [f, "Avg. Rank"] + [fmt(self.avg_rank.get((f, m))) for m in self.methods]
            )
        if any(v is not None for v in self.effectiveness.values()):
            rows.append(
                ["Effectiveness", ""]
                + [fmt(self.effectiveness.get(m)) for m in self.methods]
            )
        widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
        return (
            "\n".join(
                "  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip()
                for row in rows
            )
            + "\n"
        )


def aggregate_report(
    records: Iterable[ScoreRecord | tuple],
    *,
    datasets: Sequence[str] | None = None,
    forecasters: Sequence[str] | None = None,
    methods: Sequence[str] | None = None,
) -> EvaluationReport:
    """Aggregate per-series scores into the per-cell report.

    Accepts (dataset, forecaster, method, series_id, score) tuples. NaN
    scores are dropped with a warning. Methods are ranked per
    (dataset, forecaster) row with average ranks for ties. Significance
    stars require a two-sided Wilcoxon p < 0.05 against the baseline
    method over paired per-series scores and a better (lower) mean.

    The keyword arguments declare the intended grid; cells of the
    declared grid with no scores are reported as gaps even when a whole
    method or forecaster produced nothing.
    """
    datasets = list(datasets or [])
    forecasters = list(forecasters or [])
    methods = list(methods or [])
    scores: dict[tuple, dict[str, float]] = {}
    for rec in records:
        d, f, m, sid, score = rec
        score = float(score)
        if math.isnan(score):
            warnings.warn(
                f"dropping undefined score for {sid!r} in ({d}, {f}, {m})",
                stacklevel=2,
            )
            continue
        if d not in datasets:
            datasets.append(d)
        if f not in forecasters:
            forecasters.append(f)
        if m not in methods:
            methods.append(m)
        scores.setdefault((d, f, m), {})[sid] = score
    if not scores:
        raise DataError("no scores to aggregate")

    report = EvaluationReport(
        datasets=tuple(datasets), forecasters=tuple(forecasters), methods=tuple(methods)
    )
    for key, per_series in scores.items():
        report.cell_mean[key] = float(np.mean(list(per_series.values())))

    # ranks per (dataset, forecaster) row across whatever methods are present
    for d in datasets:
        for f in forecasters:
            present = [m for m in methods if (d, f, m) in report.cell_mean]
            if not present:
                continue
            means = np.array([report.cell_mean[(d, f, m)] for m in present])
            ranks = rankdata(means, method="average")
            for m, r in zip(present, ranks):
                report.cell_rank[(d, f, m)] = float(r)

    for f in forecasters:
        for m in methods:
            cell_means = [
                report.cell_mean[(d, f, m)]
                for d in datasets
                if (d, f, m) in report.cell_mean
            ]
            cell_ranks = [
                report.cell_rank[(d, f, m)]
                for d in datasets
                if (d, f, m) in report.cell_rank
            ]
            if cell_means:
                report.avg_mase[(f, m)] = float(np.mean(cell_means))
            if cell_ranks:
                report.avg_rank[(f, m)] = float(np.mean(cell_ranks))

    has_baseline = BASELINE_METHOD in methods
    for d in datasets:
        for f in forecasters:
            base = scores.get((d, f, BASELINE_METHOD))
            for m in methods:
                key = (d, f, m)
                if key not in report.cell_mean:
                    continue
                report.cell_p[key] = None
                report.cell_significant[key] = False
                if not has_baseline or m == BASELINE_METHOD or base is None:
                    continue
                shared = sorted(set(base) & set(scores[key]))
                pairs_m = [scores[key][sid] for sid in shared]
                pairs_b = [base[sid] for sid in shared]
                nonzero = sum(1 for x, y in zip(pairs_m, pairs_b) if x != y)
                if nonzero >= 5:
                    p = wilcoxon_signed_rank(pairs_m, pairs_b)
                    report.cell_p[key] = p
                    base_key = (d, f, BASELINE_METHOD)
                    report.cell_significant[key] = (
                        p < 0.05 and report.cell_mean[key] < report.cell_mean[base_key]
                    )

    for m in methods:
        if not has_baseline or m == BASELINE_METHOD:
            report.effectiveness[m] = None
            continue
        wins = cells = 0
        for d in datasets:
            for f in forecasters:
                key = (d, f, m)
                base_key = (d, f, BASELINE_METHOD)
                if key in report.cell_mean and base_key in report.cell_mean:
                    cells += 1
                    if report.cell_mean[key] < report.cell_mean[base_key]:
                        wins += 1
        report.effectiveness[m] = (wins / cells) if cells else None

    report.gaps = tuple(
        (d, f, m)
        for d in datasets
        for f in forecasters
        for m in methods
        if (d, f, m) not in report.cell_mean
    )
    return report


# --- grid runner ----------------------------------------------------------------

FORECASTERS = ("linear", "snaive")


def evaluate_collection(
    collection: SeriesCollection,
    methods: Sequence[AugmenterSpec],
    forecasters: Sequence[str] = FORECASTERS,
    ridge_lambda: float = 1.0,
    threads: int = 1,
) -> list[ScoreRecord]:
    """Split, augment, fit, forecast and score one dataset.

    Produces one record per (forecaster, method, original series).
    Series too short for a given forecaster are skipped with a warning,
    leaving a gap the report flags. A failing (method, forecaster) leg
    is skipped the same way rather than aborting the whole grid.
    """
    h = collection.horizon
    l = collection.input_window
    usable = [s for s in collection.series if len(s) > h]
    for s in collection.series:
        if len(s) <= h:
            warnings.warn(
                f"{collection.name}: series {s.id!r} too short for horizon, skipped",
                stacklevel=2,
            )
    if not usable:
        raise DataError(f"{collection.name}: no series long enough for horizon {h}")
    splits = {s.id: split(s, h) for s in usable}
    train = SeriesCollection(
        collection.name, [sp.train for sp in splits.values()], h, l
    )

    records: list[ScoreRecord] = []
    for spec in methods:
        try:
            augmented = augment(train, spec, threads=threads)
        except DataError as exc:
            warnings.warn(
                f"{collection.name}: augmenter {spec.method!r} failed ({exc}); skipped",
                stacklevel=2,
            )
            continue
        for forecaster in forecasters:
            try:
                results = _forecast(augmented, splits, forecaster, l, h, ridge_lambda)
            except DataError as exc:
                warnings.warn(
                    f"{collection.name}: forecaster {forecaster!r} failed for "
                    f"{spec.method!r} ({exc}); skipped",
                    stacklevel=2,
                )
                continue
            for res in results:
                score = mase(res.predictions, res.actuals, splits[res.series_id].train)
                records.append(
                    ScoreRecord(collection.name, forecaster, spec.method, res.series_id, score)
                )
    return records


def _forecast(augmented, splits, forecaster, l, h, ridge_lambda):
    results = []
    if forecaster == "snaive":
        for sid, sp in splits.items():
            if len(sp.train) < sp.train.period:
                warnings.warn(f"series {sid!r} too short for snaive, skipped", stacklevel=2)
                continue
            results.append(ForecastResult(sid, seasonal_naive(sp.train, h), sp.test))
    elif forecaster == "linear":
        model = fit_global_linear(augmented, l, h, ridge_lambda)
        for sid, sp in splits.items():
            if len(sp.train) < l:
                warnings.warn(
                    f"series {sid!r} too short for input window {l}, skipped", stacklevel=2
                )
                continue
            preds = model.predict(sp.train.values[-l:])
            results.append(ForecastResult(sid, preds, sp.test))
    else:
        raise DataError(f"unknown forecaster {forecaster!r}; choose from {FORECASTERS}")
    return results


def run_grid(
    datasets: Sequence[SeriesCollection],
    methods: Sequence[AugmenterSpec],
    forecasters: Sequence[str] = FORECASTERS,
    ridge_lambda: float = 1.0,
    threads: int = 1,
) -> tuple[list[ScoreRecord], EvaluationReport]:
    """Score every (dataset, method, forecaster) cell and aggregate."""
    records: list[ScoreRecord] = []
    for collection in datasets:
        records.extend(
            evaluate_collection(collection, methods, forecasters, ridge_lambda, threads)
        )
    report = aggregate_report(
        records,
        datasets=[c.name for c in datasets],
        forecasters=list(forecasters),
        methods=[spec.method for spec in methods],
    )
    return records, report
