"""Domain types, corpus ingestion, and train/test splitting.

Corpora live in long-format CSV with header ``unique_id,ds,y``. The
``ds`` column is an opaque ordering token: rows for each id must already
be in chronological order, and only that order (plus the seasonal
period) is ever used. No calendar arithmetic happens anywhere.
"""

from __future__ import annotations

import csv
import hashlib
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "DataError",
    "TimeSeries",
    "SeriesCollection",
    "TrainTestSplit",
    "load_collection",
    "save_collection",
    "split",
    "build_augmented_set",
    "dataset_defaults",
    "parse_config",
    "load_config",
    "substream",
    "BUILTIN_DEFAULTS",
]


class DataError(Exception):
    """Invalid input data: bad CSV, non-finite values, impossible sizes."""


def _frozen_values(values, owner: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)  # always copy; instances are immutable
    if arr.ndim != 1:
        raise DataError(f"{owner}: values must be one-dimensional")
    if arr.size < 1:
        raise DataError(f"{owner}: needs at least one value")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{owner}: non-finite value")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One univariate series: identifier, seasonal period, ordered values."""

    id: str
    period: int
    values: np.ndarray

    def __post_init__(self):
        if int(self.period) < 1:
            raise DataError(f"series {self.id!r}: period must be >= 1, got {self.period}")
        object.__setattr__(self, "period", int(self.period))
        object.__setattr__(self, "values", _frozen_values(self.values, f"series {self.id!r}"))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class SeriesCollection:
    """A named set of series plus the dataset-level forecasting metadata."""

    name: str
    series: tuple[TimeSeries, ...]
    horizon: int
    input_window: int

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))
        if len(self.series) < 1:
            raise DataError(f"collection {self.name!r}: needs at least one series")
        if self.horizon < 1:
            raise DataError(f"collection {self.name!r}: horizon must be >= 1")
        if self.input_window < 1:
            raise DataError(f"collection {self.name!r}: input_window must be >= 1")
        seen = set()
        for s in self.series:
            if s.id in seen:
                raise DataError(f"collection {self.name!r}: id collision: {s.id!r}")
            seen.add(s.id)

    def __len__(self) -> int:
        return len(self.series)

    def __iter__(self):
        return iter(self.series)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.series)


@dataclass(frozen=True, eq=False)
class TrainTestSplit:
    """Head of a series for training, its final ``h`` values for testing."""

    train: TimeSeries
    test: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "test", _frozen_values(self.test, f"test of {self.train.id!r}")
        )


def split(series: TimeSeries, h: int) -> TrainTestSplit:
    """Hold out the final ``h`` observations of ``series`` as a test set."""
    if h < 1:
        raise DataError(f"series {series.id!r}: horizon must be >= 1, got {h}")
    if len(series) <= h:
        raise DataError(
            f"series {series.id!r} too short for horizon: T={len(series)}, h={h}"
        )
    train = TimeSeries(series.id, series.period, series.values[: len(series) - h])
    return TrainTestSplit(train=train, test=series.values[len(series) - h :])


def build_augmented_set(
    original: SeriesCollection, synthetic: Sequence[TimeSeries]
) -> SeriesCollection:
    """Concatenate originals and synthetics into one training collection.

    Synthetic ids must be fresh (the ``<source>#syn<j>`` convention keeps
    them collision-free); an id already present raises ``DataError``.
    """
    if not synthetic:
        return original
    return SeriesCollection(
        name=original.name,
        series=tuple(original.series) + tuple(synthetic),
        horizon=original.horizon,
        input_window=original.input_window,
    )


# --- corpus I/O -------------------------------------------------------------

_REQUIRED_COLUMNS = ("unique_id", "ds", "y")


def load_collection(
    path,
    *,
    name: str | None = None,
    period: int | None = None,
    horizon: int | None = None,
    input_window: int | None = None,
) -> SeriesCollection:
    """Read a long-format ``unique_id,ds,y`` CSV into a collection.

    Metadata not passed explicitly falls back to known-name defaults
    (monthly: period 12 / h 12 / l 24, quarterly: 4 / 8 / 8) and then to
    the built-in monthly defaults. Malformed rows are reported with
    their line number.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus file not found: {path}")
    name = name if name is not None else path.stem
    meta = dict(BUILTIN_DEFAULTS)
    meta.update(dataset_defaults(name) or {})
    period = int(period if period is not None else meta["period"])
    horizon = int(horizon if horizon is not None else meta["horizon"])
    input_window = int(input_window if input_window is not None else meta["input_window"])

    order: list[str] = []
    buckets: dict[str, list[float]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        cols = [c.strip() for c in header]
        missing = [c for c in _REQUIRED_COLUMNS if c not in cols]
        if missing:
            raise DataError(f"{path}: header missing column(s) {missing}; need unique_id,ds,y")
        i_id = cols.index("unique_id")
        i_y = cols.index("y")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(cols):
                raise DataError(
                    f"{path}:{lineno}: expected {len(cols)} fields, got {len(row)}"
                )
            sid = row[i_id].strip()
            if not sid:
                raise DataError(f"{path}:{lineno}: empty unique_id")
            try:
                y = float(row[i_y])
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: series {sid!r}: cannot parse y value {row[i_y]!r}"
                ) from None
            if not math.isfinite(y):
                raise DataError(f"{path}:{lineno}: series {sid!r}: non-finite y value")
            if sid not in buckets:
                order.append(sid)
                buckets[sid] = []
            buckets[sid].append(y)

    if not order:
        raise DataError(f"{path}: no data rows")
    series = tuple(TimeSeries(sid, period, buckets[sid]) for sid in order)
    return SeriesCollection(name, series, horizon, input_window)


def save_collection(collection: SeriesCollection, path) -> None:
    """Write a collection back to the ``unique_id,ds,y`` CSV schema.

    ``ds`` is regenerated as a 1-based index; ``y`` uses shortest
    round-trip float formatting so re-loading reproduces exact values.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_REQUIRED_COLUMNS)
        for s in collection.series:
            for t, v in enumerate(s.values, start=1):
                writer.writerow([s.id, t, repr(float(v))])


# --- dataset metadata and flat key-value configs ----------------------------

BUILTIN_DEFAULTS: dict[str, int] = {
    "period": 12,
    "horizon": 12,
    "input_window": 24,
    "quantiles": 25,
    "seed": 0,
}

_MONTHLY = {"period": 12, "horizon": 12, "input_window": 24}
_QUARTERLY = {"period": 4, "horizon": 8, "input_window": 8}


def dataset_defaults(name: str) -> dict[str, int] | None:
    """Metadata for recognizably monthly/quarterly dataset names.

    Matches the M-competition naming habits: ``M3-M``, ``m1q``,
    ``tourism_monthly`` and the like. Returns None for anything else.
    """
    key = re.sub(r"[^a-z0-9]+", "", name.lower())
    if re.fullmatch(r"(m1|m3|m4|t|tourism)m(onthly)?", key) or key.endswith("monthly"):
        return dict(_MONTHLY)
    if re.fullmatch(r"(m1|m3|m4|t|tourism)q(uarterly)?", key) or key.endswith("quarterly"):
        return dict(_QUARTERLY)
    return None


def _coerce_scalar(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_config(text: str) -> dict:
    """Parse a flat ``key = value`` config; ``#`` starts a comment.

    Values are coerced to bool/int/float when they look like one.
    Dotted keys (``augmenter.mbb.block_length``) are kept verbatim.
    """
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DataError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        out[key.strip()] = _coerce_scalar(value.strip())
    return out


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"))


# --- seeding ----------------------------------------------------------------


def substream(seed: int, *tokens) -> np.random.Generator:
    """Independent generator derived from a root seed plus labels.

    String tokens are hashed with blake2b so stream identity does not
    depend on interpreter hash randomization. Identical (seed, tokens)
    always produce the same stream, which makes per-series work
    reproducible regardless of execution order or thread count.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for tok in tokens:
        if isinstance(tok, str):
            digest = hashlib.blake2b(tok.encode("utf-8"), digest_size=8).digest()
            entropy.append(int.from_bytes(digest, "big"))
        else:
            entropy.append(int(tok))
    return np.random.default_rng(np.random.SeedSequence(entropy))
