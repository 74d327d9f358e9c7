"""External validity scores and the permutation benchmark protocol."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import UndefinedScoreError
from .inequity import GiniTracker
from .linkage import AlgorithmConfig, MergeHistory, cut, hclust
from .metrics import CallCounter, DatasetView, MetricSpace


def contingency_table(a, b) -> np.ndarray:
    """``m[i, j] = |A_i & B_j|`` for two labellings of the same objects."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("labellings must be 1-D and of equal length")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    m = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(m, (ai, bi), 1)
    return m


def fm_index(a, b) -> float:
    """Fowlkes-Mallows index of two partitions.

    Raises :class:`UndefinedScoreError` when either partition consists of
    singletons only (zero denominator).
    """
    m = contingency_table(a, b)
    n = int(m.sum())
    # exact integer arithmetic; Python ints do not overflow
    tk = int((m.astype(object) ** 2).sum()) - n
    pk = int((m.sum(axis=1).astype(object) ** 2).sum()) - n
    qk = int((m.sum(axis=0).astype(object) ** 2).sum()) - n
    if pk == 0 or qk == 0:
        raise UndefinedScoreError("FM-index undefined for all-singleton partitions")
    return tk / math.sqrt(pk * qk)


def size_gini_curve(history: MergeHistory):
    """``[(k, gini)]`` for ``k = n .. 1``: the Gini index of cluster sizes after
    cutting the history into ``k`` clusters."""
    n = history.n
    tracker = GiniTracker(n)
    size = [1] * n
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    out = [(n, 0.0)]
    for i, j in history.endpoints.tolist():
        ri, rj = find(i), find(j)
        tracker.merge(size[ri], size[rj])
        parent[rj] = ri
        size[ri] += size[rj]
        out.append((tracker.cluster_count, tracker.g))
    return out


@dataclass
class ProtocolResult:
    """Outcome of :func:`median_fm_protocol`."""

    median_fm: float
    scores: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    calls: list = field(default_factory=list)

    @property
    def median_calls(self) -> int:
        return int(np.median(self.calls)) if self.calls else 0


def run_once(view: DatasetView, metric, config: AlgorithmConfig, reference,
             k: int, seed: int):
    """Permute the objects with ``seed``, cluster, cut at ``k`` and score.

    Returns ``(fm, calls)``.
    """
    reference = np.asarray(reference)
    perm = np.random.default_rng(seed).permutation(view.n)
    space = MetricSpace(view.take(perm), metric, CallCounter())
    cfg = AlgorithmConfig(config.algorithm, config.g, config.backend,
                          config.threads, seed, config.max_n)
    history = hclust(space, cfg)
    labels = cut(history, k)
    return fm_index(reference[perm], labels), space.calls


def median_fm_protocol(view: DatasetView, metric, config: AlgorithmConfig,
                       reference, k: int, runs: int = 10, seed: int = 0,
                       workers: int = 1) -> ProtocolResult:
    """Median FM-index over ``runs`` randomly permuted copies of the data.

    Run ``r`` uses seed ``seed + r``.  Runs are independent and may be spread
    over ``workers`` threads; results are gathered in run order.
    """
    seeds = [seed + r for r in range(runs)]

    def one(s):
        return run_once(view, metric, config, reference, k, s)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    scores = [r[0] for r in results]
    return ProtocolResult(float(np.median(scores)), scores, seeds,
                          [r[1] for r in results])


def summary_stats(values):
    """Min, quartiles, max, mean and sample standard deviation."""
    x = np.asarray(values, dtype=np.float64)
    q = np.quantile(x, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {
        "min": float(q[0]), "q1": float(q[1]), "median": float(q[2]),
        "q3": float(q[3]), "max": float(q[4]), "mean": float(x.mean()),
        "sd": float(x.std(ddof=1)) if len(x) > 1 else 0.0,
    }


def gaussian_blobs(n: int, d: int, k: int = 10, sigma: float = 1.0, seed=None):
    """Synthetic data: ``k`` centres uniform on ``[0, 10]^d``, each point a
    uniformly chosen centre plus iid ``N(0, sigma^2)`` noise.

    Returns ``(X, labels)`` with labels in ``1 .. k``.
    """
    rng = np.random.default_rng(seed)
    centres = rng.uniform(0.0, 10.0, size=(k, d))
    which = rng.integers(0, k, size=n)
    X = centres[which] + rng.normal(0.0, sigma, size=(n, d))
    return X, which + 1
