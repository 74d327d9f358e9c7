"""Pairwise dissimilarity measures with exact call accounting.

Objects live in a :class:`DatasetView` (either a numeric matrix or a list of
strings).  A :class:`MetricSpace` binds a view to a :class:`Metric` and a
:class:`CallCounter`; every evaluated pair bumps the counter by one, whether
it was computed alone or as part of a vectorised block.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError

NUMERIC = "numeric"
STRING = "string"


class CallCounter:
    """Thread-safe tally of dissimilarity evaluations."""

    def __init__(self):
        self._count = 0
        self._lock = threading.Lock()

    @property
    def count(self) -> int:
        return self._count

    def add(self, k: int = 1) -> None:
        with self._lock:
            self._count += k

    def reset(self) -> None:
        with self._lock:
            self._count = 0

    def __repr__(self):
        return f"CallCounter({self._count})"


class DatasetView:
    """Immutable, row-addressable collection of ``n`` objects.

    Use :meth:`from_array` for points in R^d and :meth:`from_strings` for
    character data.  Numeric rows are validated to be finite.
    """

    __slots__ = ("kind", "n", "dim", "_data", "_rows", "_cols")

    def __init__(self, kind, data, rows, cols=None):
        self.kind = kind
        self._data = data
        self._rows = rows
        self._cols = cols
        self.n = len(rows)
        self.dim = data.shape[1] if kind == NUMERIC else None
        if self.n < 1:
            raise ConfigurationError("a dataset needs at least one object")

    @classmethod
    def from_array(cls, X) -> "DatasetView":
        X = np.array(X, dtype=np.float64, order="C", copy=True)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise ConfigurationError("numeric data must be a 2-D matrix")
        if not np.all(np.isfinite(X)):
            raise ConfigurationError("numeric data must be finite")
        X.setflags(write=False)
        cols = np.ascontiguousarray(X.T)
        cols.setflags(write=False)
        return cls(NUMERIC, X, tuple(map(tuple, X.tolist())), cols)

    @classmethod
    def from_strings(cls, strings: Sequence[str]) -> "DatasetView":
        rows = tuple(str(s) for s in strings)
        return cls(STRING, rows, rows)

    @property
    def data(self):
        """The ``(n, dim)`` array or the tuple of strings."""
        return self._data

    @property
    def rows(self):
        return self._rows

    @property
    def columns(self):
        """Column-major copy of a numeric matrix, shape ``(dim, n)``."""
        if self.kind != NUMERIC:
            raise ConfigurationError("string data has no column view")
        return self._cols

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return self._rows[i]

    def take(self, order) -> "DatasetView":
        """Return a new view with objects reordered (or subset) by ``order``."""
        order = np.asarray(order, dtype=np.intp)
        if self.kind == NUMERIC:
            return DatasetView.from_array(self._data[order])
        return DatasetView.from_strings([self._rows[i] for i in order])

    def __eq__(self, other):
        if not isinstance(other, DatasetView) or other.kind != self.kind:
            return NotImplemented
        if self.kind == NUMERIC:
            return np.array_equal(self._data, other._data)
        return self._rows == other._rows

    __hash__ = None

    def __repr__(self):
        if self.kind == NUMERIC:
            return f"DatasetView(numeric, n={self.n}, dim={self.dim})"
        return f"DatasetView(string, n={self.n})"


# Scalar kernels.  Sums run left to right over the coordinates so that the
# block versions below reproduce them bit for bit.

def _euclidean(a, b):
    s = 0.0
    for x, y in zip(a, b):
        t = x - y
        s += t * t
    return math.sqrt(s)


def _manhattan(a, b):
    s = 0.0
    for x, y in zip(a, b):
        s += abs(x - y)
    return s


def _maximum(a, b):
    m = 0.0
    for x, y in zip(a, b):
        t = abs(x - y)
        if t > m:
            m = t
    return m


def _hamming(a, b):
    if len(a) != len(b):
        raise ConfigurationError(
            f"hamming distance needs equal lengths, got {len(a)} and {len(b)}")
    return float(sum(x != y for x, y in zip(a, b)))


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insertions, deletions, substitutions)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _levenshtein(a, b):
    return float(levenshtein(a, b))


# Block kernels: one object against the columns ``cols[:, :m]``.  Narrow
# blocks (VP-tree leaves) use a cumulative sum down the coordinate axis, wide
# ones (Prim scans) loop over coordinates; both add left to right.

_NARROW = 64


def _euclidean_block(a, cols):
    if cols.shape[1] <= _NARROW:
        t = cols - np.asarray(a)[:, None]
        t *= t
        return np.sqrt(np.cumsum(t, axis=0)[-1])
    acc = cols[0] - a[0]
    acc *= acc
    for c in range(1, len(a)):
        t = cols[c] - a[c]
        t *= t
        acc += t
    return np.sqrt(acc)


def _manhattan_block(a, cols):
    if cols.shape[1] <= _NARROW:
        return np.cumsum(np.abs(cols - np.asarray(a)[:, None]), axis=0)[-1]
    acc = np.abs(cols[0] - a[0])
    for c in range(1, len(a)):
        acc += np.abs(cols[c] - a[c])
    return acc


def _maximum_block(a, cols):
    if cols.shape[1] <= _NARROW:
        return np.abs(cols - np.asarray(a)[:, None]).max(axis=0, initial=0.0)
    acc = np.abs(cols[0] - a[0])
    for c in range(1, len(a)):
        np.maximum(acc, np.abs(cols[c] - a[c]), out=acc)
    return acc


def _hamming_block(a, cols):
    if cols.shape[1] <= _NARROW:
        return (cols != np.asarray(a)[:, None]).sum(axis=0, dtype=np.float64)
    acc = (cols[0] != a[0]).astype(np.float64)
    for c in range(1, len(a)):
        acc += cols[c] != a[c]
    return acc


@dataclass(frozen=True)
class Metric:
    """A named dissimilarity measure.

    ``kinds`` lists the dataset kinds the metric accepts; ``block`` is an
    optional vectorised kernel for numeric data.
    """

    name: str
    kinds: tuple
    pair: Callable
    block: Callable | None = None
    integer_valued: bool = False

    def accepts(self, view: DatasetView) -> bool:
        return view.kind in self.kinds


METRICS = {
    "euclidean": Metric("euclidean", (NUMERIC,), _euclidean, _euclidean_block),
    "manhattan": Metric("manhattan", (NUMERIC,), _manhattan, _manhattan_block),
    "maximum": Metric("maximum", (NUMERIC,), _maximum, _maximum_block),
    "hamming": Metric("hamming", (NUMERIC, STRING), _hamming, _hamming_block,
                      integer_valued=True),
    "levenshtein": Metric("levenshtein", (STRING,), _levenshtein,
                          integer_valued=True),
}


def get_metric(name) -> Metric:
    if isinstance(name, Metric):
        return name
    try:
        return METRICS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown metric {name!r}; choose from {sorted(METRICS)}") from None


class MetricSpace:
    """A dataset paired with a dissimilarity measure and a call counter.

    Parameters
    ----------
    view : DatasetView
    metric : str or Metric
    counter : CallCounter, optional
        A fresh counter is created when omitted.
    """

    def __init__(self, view: DatasetView, metric="euclidean", counter=None):
        metric = get_metric(metric)
        if not metric.accepts(view):
            raise ConfigurationError(
                f"metric {metric.name!r} cannot be used with {view.kind} data")
        if metric.name == "hamming" and view.kind == STRING:
            lengths = {len(s) for s in view.rows}
            if len(lengths) > 1:
                raise ConfigurationError(
                    "hamming distance needs strings of equal length")
        self.view = view
        self.metric = metric
        self.counter = counter if counter is not None else CallCounter()
        self._pair = metric.pair
        self._rows = view.rows

    @property
    def n(self) -> int:
        return self.view.n

    @property
    def calls(self) -> int:
        return self.counter.count

    def d(self, i: int, j: int) -> float:
        """Dissimilarity between objects ``i`` and ``j``."""
        self.counter.add(1)
        return self._pair(self._rows[i], self._rows[j])

    def d_many(self, i: int, js) -> np.ndarray:
        """Dissimilarities between object ``i`` and each of ``js``."""
        js = np.asarray(js, dtype=np.intp)
        self.counter.add(len(js))
        a = self._rows[i]
        if self.metric.block is not None and self.view.kind == NUMERIC:
            return self.metric.block(a, self.view.columns[:, js])
        pair, rows = self._pair, self._rows
        return np.array([pair(a, rows[j]) for j in js], dtype=np.float64)

    def d_block(self, i: int, cols) -> np.ndarray:
        """Dissimilarities between object ``i`` and the columns of ``cols``.

        ``cols`` is a ``(dim, m)`` slice of data laid out by the caller; the
        counter grows by ``m``.
        """
        self.counter.add(cols.shape[1])
        return self.metric.block(self._rows[i], cols)

    @property
    def vectorised(self) -> bool:
        return self.metric.block is not None and self.view.kind == NUMERIC


def dissimilarity(view: DatasetView, metric, i: int, j: int,
                  counter: CallCounter) -> float:
    """Evaluate the metric on objects ``i`` and ``j``, counting one call."""
    metric = get_metric(metric)
    if not metric.accepts(view):
        raise ConfigurationError(
            f"metric {metric.name!r} cannot be used with {view.kind} data")
    counter.add(1)
    return metric.pair(view.rows[i], view.rows[j])
