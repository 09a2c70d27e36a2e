"""Synthetic series generation by walking the quantile transition graph.

The walk starts in the state of the source's first observation, draws
each next state from the current row of the transition matrix, and maps
every visited state back to the value domain by sampling uniformly
(with replacement) from that state's pool of original values. For
non-stationary sources the walk runs on the STL remainder and the
result is recombined with the original trend and seasonal components.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from grasynda.core import DataError, TimeSeries, substream
from grasynda.quantile_graph import (
    DEFAULT_QUANTILES,
    DiscreteSeries,
    QuantileBins,
    QuantileGraph,
    build_graph,
    discretize,
)
from grasynda.stl import StlDecomposition, recombine, stl_decompose

__all__ = [
    "GeneratorConfig",
    "SyntheticSeries",
    "sample_states",
    "states_to_values",
    "prepare_graph",
    "grasynda",
    "synthetic_id",
]


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for one generation run.

    ``length=None`` matches the source length. ``use_stl=None`` enables
    the decomposition automatically when the series spans at least two
    seasonal cycles (and the period is at least 2).
    """

    seed: int = 0
    length: int | None = None
    replicas: int = 1
    quantiles: int = DEFAULT_QUANTILES
    use_stl: bool | None = None

    def __post_init__(self):
        if self.length is not None and self.length < 1:
            raise DataError(f"length must be >= 1, got {self.length}")
        if self.replicas < 1:
            raise DataError(f"replicas must be >= 1, got {self.replicas}")
        if self.quantiles < 1:
            raise DataError(f"quantiles must be >= 1, got {self.quantiles}")


@dataclass(frozen=True, eq=False)
class SyntheticSeries:
    """One generated series remembering which source it came from."""

    id: str
    values: np.ndarray
    source_id: str

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size


def synthetic_id(source_id: str, replica: int) -> str:
    """Fresh id for the replica-th synthetic copy of a source series."""
    return f"{source_id}#syn{replica}"


def sample_states(
    graph: QuantileGraph, initial_state: int, length: int, rng: np.random.Generator
) -> DiscreteSeries:
    """Walk the transition matrix for ``length`` steps from an initial state.

    Each next state is drawn from the categorical distribution given by
    the current state's matrix row; the output is deterministic given
    the graph, initial state, length and generator state.
    """
    if not 1 <= initial_state <= graph.k:
        raise DataError(f"initial state {initial_state} outside 1..{graph.k}")
    if length < 1:
        raise DataError(f"length must be >= 1, got {length}")
    cum = np.cumsum(graph.transition, axis=1)
    cum[:, -1] = 1.0  # guard against float undershoot in the last column
    rows = cum.tolist()
    draws = rng.random(length - 1)
    out = np.empty(length, dtype=np.int64)
    state = initial_state - 1
    out[0] = state
    for t in range(length - 1):
        state = bisect.bisect_right(rows[state], draws[t])
        if state >= graph.k:  # unreachable unless a row is degenerate
            state = graph.k - 1
        out[t + 1] = state
    return DiscreteSeries(labels=out + 1, k=graph.k)


def states_to_values(
    states: DiscreteSeries, bins: QuantileBins, rng: np.random.Generator
) -> np.ndarray:
    """Map each state to a value drawn uniformly from its pool."""
    sizes = np.array([pool.size for pool in bins.bin_values], dtype=np.int64)
    if np.any(sizes == 0):
        raise DataError("cannot sample from an empty bin")
    idx0 = states.labels - 1
    if idx0.size and (idx0.min() < 0 or idx0.max() >= bins.k):
        raise DataError("state labels outside 1..k")
    offsets = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    flat = np.concatenate(bins.bin_values)
    picks = rng.integers(0, sizes[idx0])
    return flat[offsets[idx0] + picks]


class PreparedGraph(NamedTuple):
    """Everything the walk needs, plus the decomposition when STL ran."""

    graph: QuantileGraph
    discrete: DiscreteSeries
    decomposition: StlDecomposition | None


def _stl_active(series: TimeSeries, config: GeneratorConfig) -> bool:
    if config.use_stl is not None:
        return bool(config.use_stl)
    return series.period >= 2 and len(series) >= 2 * series.period


def prepare_graph(series: TimeSeries, config: GeneratorConfig = GeneratorConfig()) -> PreparedGraph:
    """Discretize a series (or its STL remainder) and build its graph."""
    decomposition = None
    target = series.values
    if _stl_active(series, config):
        decomposition = stl_decompose(series)
        target = decomposition.remainder
    discrete, bins = discretize(target, config.quantiles)
    return PreparedGraph(build_graph(discrete, bins), discrete, decomposition)


def grasynda(series: TimeSeries, config: GeneratorConfig = GeneratorConfig()) -> list[SyntheticSeries]:
    """Generate ``config.replicas`` synthetic series from one source.

    Each replica runs on an independent substream derived from
    (seed, source id, replica index), so outputs are identical across
    runs and thread schedules. The walk starts in the state of the
    first observation of whatever was discretized (the raw series, or
    its remainder when STL is active).
    """
    prep = prepare_graph(series, config)
    length = config.length if config.length is not None else len(series)
    if prep.decomposition is not None and length != len(series):
        raise DataError(
            f"series {series.id!r}: synthetic length {length} != source length "
            f"{len(series)}; trend/seasonal recombination needs equal lengths "
            f"(set use_stl=False to generate other lengths)"
        )
    first_state = int(prep.discrete.labels[0])
    out = []
    for replica in range(1, config.replicas + 1):
        rng = substream(config.seed, series.id, replica)
        states = sample_states(prep.graph, first_state, length, rng)
        values = states_to_values(states, prep.graph.bins, rng)
        if prep.decomposition is not None:
            values = recombine(prep.decomposition, values)
        out.append(
            SyntheticSeries(
                id=synthetic_id(series.id, replica),
                values=values,
                source_id=series.id,
            )
        )
    return out
