"""Quantile-state discretization and the transition graph built on it.

Each value of a series is assigned to one of ``k`` states via
equal-frequency binning; consecutive state pairs are tallied into a
directed weighted graph whose edge weights are empirical transition
probabilities, so every row of the matrix sums to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from grasynda.core import DataError

__all__ = [
    "DiscreteSeries",
    "QuantileBins",
    "QuantileGraph",
    "discretize",
    "build_graph",
    "export_graph",
]

DEFAULT_QUANTILES = 25


@dataclass(frozen=True, eq=False)
class DiscreteSeries:
    """State-label sequence: labels are 1-based indices into 1..k."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.labels.size


@dataclass(frozen=True, eq=False)
class QuantileBins:
    """Cut points plus the pool of original values behind each state.

    ``boundaries`` holds the k-1 strictly increasing cut points; a value
    equal to a boundary belongs to the lower state. ``bin_values[j]`` is
    the multiset of source values assigned to state j+1, kept sorted.
    """

    k: int
    boundaries: np.ndarray
    bin_values: tuple[np.ndarray, ...]

    def __post_init__(self):
        boundaries = np.asarray(self.boundaries, dtype=np.float64)
        boundaries.flags.writeable = False
        object.__setattr__(self, "boundaries", boundaries)
        pools = []
        for pool in self.bin_values:
            arr = np.asarray(pool, dtype=np.float64)
            arr.flags.writeable = False
            pools.append(arr)
        object.__setattr__(self, "bin_values", tuple(pools))
        if len(self.bin_values) != self.k:
            raise DataError(f"expected {self.k} bins, got {len(self.bin_values)}")
        if self.boundaries.size != self.k - 1:
            raise DataError(
                f"expected {self.k - 1} boundaries, got {self.boundaries.size}"
            )
        if np.any(np.diff(self.boundaries) <= 0):
            raise DataError("bin boundaries must be strictly increasing")
        if any(pool.size == 0 for pool in self.bin_values):
            raise DataError("every bin must hold at least one value")

    def assign(self, values) -> np.ndarray:
        """1-based state labels; values equal to a cut point go lower."""
        values = np.asarray(values, dtype=np.float64)
        return np.searchsorted(self.boundaries, values, side="left").astype(np.int64) + 1


@dataclass(frozen=True, eq=False)
class QuantileGraph:
    """Directed weighted transition graph over the quantile states.

    ``transition`` is the row-stochastic matrix; ``counts`` keeps the
    raw tallies before dead-end states were given their self-loop, so
    the total count always equals T-1.
    """

    k: int
    transition: np.ndarray
    counts: np.ndarray
    bins: QuantileBins

    def __post_init__(self):
        for attr in ("transition", "counts"):
            arr = np.asarray(getattr(self, attr))
            arr.flags.writeable = False
            object.__setattr__(self, attr, arr)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        """(from_state, to_state, probability) for every positive entry."""
        rows, cols = np.nonzero(self.transition)
        return [
            (int(i) + 1, int(j) + 1, float(self.transition[i, j]))
            for i, j in zip(rows, cols)
        ]


def _values_of(series) -> np.ndarray:
    return np.asarray(getattr(series, "values", series), dtype=np.float64)


def discretize(series, k_requested: int = DEFAULT_QUANTILES) -> tuple[DiscreteSeries, QuantileBins]:
    """Equal-frequency binning of a series into at most ``k_requested`` states.

    The effective state count starts at min(k_requested, number of
    distinct values). Equal values must share a state, so each ideal
    equal-frequency cut snaps to the nearest rank position where the
    sorted values actually change; cuts forced onto the same position
    by duplicated values coincide and the affected bins merge, reducing
    k. Cut points sit at the midpoint between the last value of one bin
    and the first value of the next in sorted order, and labels depend
    only on the ranks of the values.
    """
    values = _values_of(series)
    if values.ndim != 1 or values.size < 1:
        raise DataError("discretize needs a one-dimensional, non-empty series")
    if k_requested < 1:
        raise DataError(f"k_requested must be >= 1, got {k_requested}")
    T = values.size
    svals = np.sort(values)
    n_distinct = 1 + int(np.count_nonzero(np.diff(svals)))
    k_target = min(int(k_requested), n_distinct)

    # Positions where a cut is usable: the value changes and the midpoint
    # does not round onto the upper value (adjacent-float guard).
    change = np.flatnonzero(svals[:-1] < svals[1:]) + 1
    usable = np.array(
        [p for p in change if (svals[p - 1] + svals[p]) / 2.0 < svals[p]], dtype=np.int64
    )

    cut_positions: list[int] = []
    if k_target > 1 and usable.size:
        for j in range(1, k_target):
            ideal = (j * T) // k_target
            at = np.searchsorted(usable, ideal)
            candidates = usable[max(0, at - 1) : at + 1]
            snapped = int(min(candidates, key=lambda p: (abs(int(p) - ideal), p)))
            if snapped not in cut_positions:
                cut_positions.append(snapped)
        cut_positions.sort()

    k = len(cut_positions) + 1
    boundaries = [(svals[p - 1] + svals[p]) / 2.0 for p in cut_positions]
    pools = tuple(np.split(svals, cut_positions))
    bins = QuantileBins(k=k, boundaries=np.asarray(boundaries), bin_values=pools)
    labels = bins.assign(values)
    return DiscreteSeries(labels=labels, k=k), bins


def build_graph(discrete: DiscreteSeries, bins: QuantileBins) -> QuantileGraph:
    """Tally consecutive state transitions and normalize them row-wise.

    A dead-end state (one with no observed outgoing transition, which
    can only happen at the final observation) gets a probability-1
    self-loop so the matrix stays row-stochastic without inventing
    transitions to other states.
    """
    if discrete.k != bins.k:
        raise DataError(f"label/bin mismatch: {discrete.k} states vs {bins.k} bins")
    total_pool = sum(pool.size for pool in bins.bin_values)
    if len(discrete) != total_pool:
        raise DataError(
            f"label/bin mismatch: {len(discrete)} labels vs {total_pool} binned values"
        )
    labels = discrete.labels
    if labels.size and (labels.min() < 1 or labels.max() > bins.k):
        raise DataError("labels outside 1..k")

    k = bins.k
    counts = np.zeros((k, k), dtype=np.int64)
    if labels.size >= 2:
        np.add.at(counts, (labels[:-1] - 1, labels[1:] - 1), 1)
    totals = counts.sum(axis=1)
    transition = np.zeros((k, k), dtype=np.float64)
    for i in range(k):
        if totals[i] > 0:
            transition[i] = counts[i] / totals[i]
        else:
            transition[i, i] = 1.0
    return QuantileGraph(k=k, transition=transition, counts=counts, bins=bins)


def export_graph(graph: QuantileGraph, format: str = "dot") -> str:
    """Render a graph as Graphviz DOT or as a plain probability matrix.

    DOT output carries one node per state and one edge per positive
    transition probability, labeled to six decimals. ``matrix-csv`` is
    k comma-separated rows at full float precision.
    """
    if format == "dot":
        lines = ["digraph quantile_graph {", "  rankdir=LR;"]
        for i in range(graph.k):
            lines.append(f'  s{i + 1} [label="{i + 1}"];')
        for i, j, p in graph.edges:
            lines.append(f'  s{i} -> s{j} [label="{p:.6f}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"
    if format == "matrix-csv":
        rows = [
            ",".join(repr(float(p)) for p in graph.transition[i])
            for i in range(graph.k)
        ]
        return "\n".join(rows) + "\n"
    raise DataError(f"unknown graph export format {format!r}; use dot or matrix-csv")
