"""Log transform and sliding-window training pairs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WindowOutOfRange
from .ingest import CountrySeries


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class LogSeries:
    country: str
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    @property
    def N(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def head(self, n: int) -> "LogSeries":
        return LogSeries(self.country, self.values[:n])


@dataclass(frozen=True, eq=False)
class SupervisedSet:
    """Rows of ``inputs`` are windows ending at ``end_indices``; ``targets``
    are the values ``tau`` days later."""

    inputs: np.ndarray  # (count, w)
    targets: np.ndarray  # (count,)
    end_indices: np.ndarray
    w: int
    tau: int

    @property
    def count(self) -> int:
        return len(self.targets)


def log_transform(series: CountrySeries) -> LogSeries:
    return LogSeries(series.country, np.log(np.asarray(series.safe_counts, dtype=np.float64)))


def window_at(ls: LogSeries, end_index: int, w: int) -> np.ndarray:
    if w < 1 or end_index < w - 1 or end_index >= ls.N:
        raise WindowOutOfRange(f"window of {w} ending at {end_index} (series length {ls.N})")
    return ls.values[end_index - w + 1:end_index + 1]


def build_supervised(ls: LogSeries, w: int, tau: int, max_pairs: int | None = None) -> SupervisedSet:
    """All (window, value ``tau`` days ahead) pairs that fit inside ``ls``.

    ``max_pairs`` keeps only the most recent pairs.
    """
    if w < 1 or tau < 1:
        raise ValueError("w and tau must be >= 1")
    count = max(ls.N - w - tau + 1, 0)
    if count == 0:
        return SupervisedSet(np.empty((0, w)), np.empty(0), np.empty(0, dtype=int), w, tau)
    v = ls.values
    inputs = np.lib.stride_tricks.sliding_window_view(v, w)[:count]
    ends = np.arange(w - 1, w - 1 + count)
    targets = v[ends + tau]
    if max_pairs is not None and count > max_pairs:
        inputs, targets, ends = inputs[-max_pairs:], targets[-max_pairs:], ends[-max_pairs:]
    return SupervisedSet(np.array(inputs), np.array(targets), ends, w, tau)
