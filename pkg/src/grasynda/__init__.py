"""Grasynda: graph-based synthetic time series generation.

A univariate series is discretized into quantile states, the observed
state-to-state transitions are collected into a row-stochastic matrix,
and synthetic series are produced by walking that matrix and sampling
values from each visited state's pool. Non-stationary series are first
split into trend / seasonal / remainder so the walk runs on the
(roughly stationary) remainder.

The package also ships the usual baseline augmenters (jitter, scaling,
warps, moving block bootstrap, DBA, TSMixup) and a small forecasting
evaluation harness that scores augmenters by downstream MASE.
"""

from grasynda.core import (
    DataError,
    SeriesCollection,
    TimeSeries,
    TrainTestSplit,
    build_augmented_set,
    load_collection,
    save_collection,
    split,
)
from grasynda.quantile_graph import (
    DiscreteSeries,
    QuantileBins,
    QuantileGraph,
    build_graph,
    discretize,
    export_graph,
)
from grasynda.stl import StlDecomposition, StlParams, recombine, stl_decompose
from grasynda.generator import (
    GeneratorConfig,
    SyntheticSeries,
    grasynda,
    prepare_graph,
    sample_states,
    states_to_values,
)
from grasynda.baselines import AugmenterSpec, augment
from grasynda.evaluation import (
    EvaluationReport,
    aggregate_report,
    fit_global_linear,
    mase,
    seasonal_naive,
    wilcoxon_signed_rank,
)

__version__ = "0.1.0"

__all__ = [
    "AugmenterSpec",
    "DataError",
    "DiscreteSeries",
    "EvaluationReport",
    "GeneratorConfig",
    "QuantileBins",
    "QuantileGraph",
    "SeriesCollection",
    "StlDecomposition",
    "StlParams",
    "SyntheticSeries",
    "TimeSeries",
    "TrainTestSplit",
    "aggregate_report",
    "augment",
    "build_augmented_set",
    "build_graph",
    "discretize",
    "export_graph",
    "fit_global_linear",
    "grasynda",
    "load_collection",
    "mase",
    "prepare_graph",
    "recombine",
    "sample_states",
    "save_collection",
    "seasonal_naive",
    "split",
    "states_to_values",
    "stl_decompose",
    "wilcoxon_signed_rank",
]
