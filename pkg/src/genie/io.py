"""Reading benchmark data: point matrices, label vectors and string lists.

All readers accept plain or gzip-compressed files (detected by content).
Benchmark sets are looked up as ``<name>.data[.gz]`` and
``<name>.labels[.gz]`` in the directory named by ``GENIE_DATA_DIR``
(default ``~/.cache/genie``).
"""

from __future__ import annotations

import gzip
import io
import os
import urllib.request
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParseError
from .metrics import DatasetView

DATA_DIR_ENV = "GENIE_DATA_DIR"
DEFAULT_BASE_URL = "http://www.gagolewski.com/resources/data/clustering/"


@dataclass(frozen=True)
class DatasetInfo:
    kind: str      # "points" or "strings"
    metric: str


# name -> how to read it and which dissimilarity the benchmark uses
BENCHMARKS = {
    **{f"actg{i}": DatasetInfo("strings", "levenshtein") for i in (1, 2, 3)},
    **{f"binstr{i}": DatasetInfo("strings", "hamming") for i in (1, 2, 3)},
    **{name: DatasetInfo("points", "euclidean") for name in (
        "s1", "s2", "s3", "s4", "a1", "a2", "a3",
        "g2-2-100", "g2-16-100", "g2-64-100", "unbalance", "Aggregation",
        "Compound", "pathbased", "spiral", "D31", "R15", "flame", "jain",
        "iris", "iris5")},
}

BUNDLED = ("iris", "iris5")


def data_dir() -> Path:
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "genie"


def _read_text(path) -> str:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not valid UTF-8 ({exc.reason})", path) from None


def parse_points(text: str, path=None) -> np.ndarray:
    rows = []
    dim = None
    for lineno, line in enumerate(io.StringIO(text), 1):
        tokens = line.split()
        if not tokens:
            continue
        try:
            row = [float(t) for t in tokens]
        except ValueError as exc:
            raise ParseError(f"non-numeric token ({exc})", path, lineno) from None
        if dim is None:
            dim = len(row)
        elif len(row) != dim:
            raise ParseError(f"expected {dim} columns, found {len(row)}",
                             path, lineno)
        rows.append(row)
    if not rows:
        raise ParseError("no data rows", path)
    return np.array(rows, dtype=np.float64)


def load_points(path) -> DatasetView:
    """Whitespace-separated numeric rows, one object per line."""
    X = parse_points(_read_text(path), path)
    if not np.all(np.isfinite(X)):
        raise ParseError("non-finite values", path)
    return DatasetView.from_array(X)


def write_points(X, path) -> None:
    """Write a matrix with 12 significant digits per value."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    lines = (" ".join(f"{v:.12g}" for v in row) + "\n" for row in X.tolist())
    data = "".join(lines).encode("utf-8")
    if str(path).endswith(".gz"):
        data = gzip.compress(data, mtime=0)
    Path(path).write_bytes(data)


def remap_labels(raw) -> np.ndarray:
    """Relabel to ``1 .. k`` in order of first appearance."""
    mapping = {}
    out = np.empty(len(raw), dtype=np.int64)
    for i, v in enumerate(raw):
        if v not in mapping:
            mapping[v] = len(mapping) + 1
        out[i] = mapping[v]
    return out


def load_labels(path) -> np.ndarray:
    """One integer label per line, remapped to ``1 .. k``."""
    raw = []
    for lineno, line in enumerate(io.StringIO(_read_text(path)), 1):
        token = line.strip()
        if not token:
            continue
        try:
            raw.append(int(token))
        except ValueError:
            try:
                value = float(token)
            except ValueError:
                value = None
            if value is None or not value.is_integer():
                raise ParseError(f"not an integer label: {token!r}",
                                 path, lineno) from None
            raw.append(int(value))
    if not raw:
        raise ParseError("no labels", path)
    return remap_labels(raw)


def write_labels(labels, path) -> None:
    data = "".join(f"{int(v)}\n" for v in labels).encode("utf-8")
    if str(path).endswith(".gz"):
        data = gzip.compress(data, mtime=0)
    Path(path).write_bytes(data)


def load_strings(path) -> DatasetView:
    """One string per line; blank lines are an error."""
    text = _read_text(path)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("no strings", path)
    out = []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\r")
        if not line:
            raise ParseError("empty line", path, lineno)
        out.append(line)
    return DatasetView.from_strings(out)


@dataclass
class BenchmarkCase:
    """A dataset together with its reference partition."""

    name: str
    data: DatasetView
    reference: np.ndarray
    metric: str

    @property
    def k(self) -> int:
        return int(len(np.unique(self.reference)))

    @property
    def n(self) -> int:
        return self.data.n


def _find(directory: Path, stem: str):
    for suffix in (".gz", ""):
        p = directory / (stem + suffix)
        if p.exists():
            return p
    return None


def _bundled_iris():
    pkg = resources.files("genie") / "data"
    X = parse_points(gzip.decompress((pkg / "iris.data.gz").read_bytes()).decode())
    raw = gzip.decompress((pkg / "iris.labels.gz").read_bytes()).decode().split()
    return X, remap_labels([int(v) for v in raw])


def load_benchmark(name: str, directory=None) -> BenchmarkCase:
    """Load ``name`` from the data directory.

    ``iris`` and ``iris5`` fall back to a copy shipped with the package.
    Raises ``FileNotFoundError`` when the files are not cached.
    """
    directory = Path(directory) if directory is not None else data_dir()
    info = BENCHMARKS.get(name, DatasetInfo("points", "euclidean"))
    data_path = _find(directory, f"{name}.data")
    labels_path = _find(directory, f"{name}.labels")
    if data_path is None or labels_path is None:
        if name in BUNDLED:
            X, y = _bundled_iris()
            if name == "iris5":
                # last five observations of the first class, all of the others
                keep = np.r_[np.flatnonzero(y == 1)[-5:], np.flatnonzero(y != 1)]
                X, y = X[keep], remap_labels(y[keep].tolist())
            return BenchmarkCase(name, DatasetView.from_array(X), y, info.metric)
        missing = data_path or labels_path
        raise FileNotFoundError(
            f"benchmark {name!r} not found in {directory}"
            + ("" if missing is None else f" (only {missing.name} present)"))
    if info.kind == "strings":
        view = load_strings(data_path)
    else:
        view = load_points(data_path)
    reference = load_labels(labels_path)
    if len(reference) != view.n:
        raise ParseError(
            f"{len(reference)} labels for {view.n} objects", labels_path)
    return BenchmarkCase(name, view, reference, info.metric)


def fetch(names, directory=None, base_url: str = DEFAULT_BASE_URL,
          overwrite: bool = False):
    """Download ``<name>.data.gz`` and ``<name>.labels.gz`` for each name.

    Returns a dict ``name -> None`` on success or the error message.
    """
    directory = Path(directory) if directory is not None else data_dir()
    directory.mkdir(parents=True, exist_ok=True)
    status = {}
    for name in names:
        try:
            for stem in (f"{name}.data.gz", f"{name}.labels.gz"):
                target = directory / stem
                if target.exists() and not overwrite:
                    continue
                with urllib.request.urlopen(base_url.rstrip("/") + "/" + stem,
                                            timeout=60) as resp:
                    payload = resp.read()
                tmp = target.with_suffix(target.suffix + ".part")
                tmp.write_bytes(payload)
                tmp.replace(target)
            status[name] = None
        except OSError as exc:
            status[name] = str(exc)
    return status
