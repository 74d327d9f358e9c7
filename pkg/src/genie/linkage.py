"""Agglomerative merge procedures.

:func:`genie` and :func:`single_linkage` consume a precomputed MST.
:func:`classic_linkage` implements complete, average and Ward linkage on a
dense distance matrix and exists for benchmark comparison only.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .errors import (ConfigurationError, InternalConsistencyError,
                     ParseError, ResourceLimitError)
from .inequity import GiniTracker
from .metrics import MetricSpace
from .mst import Mst, MstEdge, build_mst
from .unionfind import SizedDisjointSets

CLASSIC_SCHEMES = ("single", "complete", "average", "ward")
ALGORITHMS = ("genie",) + CLASSIC_SCHEMES
DEFAULT_MAX_N = 20_000


@dataclass
class MergeHistory:
    """Ordered record of the ``n - 1`` merges.

    Cluster ids follow the convention: objects are ``1 .. n`` and the cluster
    created at step ``t`` (1-based) is ``n + t``.  ``endpoints[t]`` holds one
    object of each merged cluster (0-based), which is all :func:`cut` needs.
    Heights are not necessarily monotone.
    """

    n: int
    merges: np.ndarray      # (n-1, 2) int, cluster ids
    heights: np.ndarray     # (n-1,) float
    endpoints: np.ndarray   # (n-1, 2) int, object indices

    def __len__(self):
        return len(self.heights)

    def to_text(self) -> str:
        """Merge-matrix text: objects as ``-1 .. -n``, clusters as step numbers."""
        n = self.n
        lines = []
        for (a, b), h in zip(self.merges.tolist(), self.heights.tolist()):
            a = -a if a <= n else a - n
            b = -b if b <= n else b - n
            lines.append(f"{a} {b} {h:.12g}\n")
        return "".join(lines)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "MergeHistory":
        rows = []
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split()
            try:
                rows.append((int(parts[0]), int(parts[1]), float(parts[2])))
            except (ValueError, IndexError):
                raise ParseError("expected 'left right height'", line=lineno) from None
        n = len(rows) + 1
        merges = np.empty((n - 1, 2), dtype=np.int64)
        heights = np.empty(n - 1)
        endpoints = np.empty((n - 1, 2), dtype=np.int64)
        member = {}
        for t, (a, b, h) in enumerate(rows):
            ids = []
            for x in (a, b):
                cid = -x if x < 0 else x + n
                ids.append(cid)
            merges[t] = ids
            heights[t] = h
            endpoints[t] = [(-x - 1) if x < 0 else member[x] for x in (a, b)]
            member[t + 1] = endpoints[t][0]
        return cls(n, merges, heights, endpoints)

    def partitions(self):
        """Yield the label vector after each step (useful for comparisons)."""
        ds = SizedDisjointSets(self.n)
        for i, j in self.endpoints.tolist():
            ds.link(i, j)
            yield np.array([ds.find_set(x) for x in range(self.n)])


class _HistoryBuilder:
    def __init__(self, n):
        self.n = n
        self.ds = SizedDisjointSets(n)
        self.cluster_id = list(range(1, n + 1))  # indexed by set root
        self.merges = np.empty((max(n - 1, 0), 2), dtype=np.int64)
        self.heights = np.empty(max(n - 1, 0))
        self.endpoints = np.empty((max(n - 1, 0), 2), dtype=np.int64)
        self.t = 0

    def link(self, i, j, height):
        ds = self.ds
        s1, s2 = ds.find_set(i), ds.find_set(j)
        if s1 == s2:
            raise InternalConsistencyError(
                f"edge ({i}, {j}) joins objects already in one cluster")
        t = self.t
        self.merges[t] = (self.cluster_id[s1], self.cluster_id[s2])
        self.heights[t] = height
        self.endpoints[t] = (i, j)
        root = ds.link(i, j)
        self.cluster_id[root] = self.n + t + 1
        self.t += 1

    def result(self):
        return MergeHistory(self.n, self.merges, self.heights, self.endpoints)


class ConditionalPq:
    """Min-priority queue of MST edges keyed by ``(dist, index1, index2)``
    with a conditional pop.

    Edges rejected by :meth:`pop_conditional` are parked in an auxiliary list.
    The park is kept across calls as long as the caller passes the same
    ``state`` token (the rejection reason cannot have changed); otherwise it
    is returned to the main heap first.
    """

    def __init__(self, edges=()):
        self._main = [(float(e[2]), int(e[0]), int(e[1])) for e in edges]
        heapq.heapify(self._main)
        self._aux = []
        self._state = None

    def __len__(self):
        return len(self._main) + len(self._aux)

    @property
    def parked(self) -> int:
        return len(self._aux)

    def push(self, edge) -> None:
        heapq.heappush(self._main, (float(edge[2]), int(edge[0]), int(edge[1])))

    def _restore(self):
        if self._aux:
            self._main.extend(self._aux)
            heapq.heapify(self._main)
            self._aux = []
        self._state = None

    def pop(self) -> MstEdge:
        self._restore()
        if not self._main:
            raise IndexError("pop from an empty queue")
        d, i, j = heapq.heappop(self._main)
        return MstEdge(i, j, d)

    def pop_conditional(self, predicate, state=None) -> MstEdge:
        """Cheapest edge satisfying ``predicate(MstEdge)``."""
        if state is None or state != self._state:
            self._restore()
            self._state = state
        main, aux = self._main, self._aux
        while main:
            d, i, j = heapq.heappop(main)
            e = MstEdge(i, j, d)
            if predicate(e):
                return e
            aux.append((d, i, j))
        raise InternalConsistencyError("no edge satisfies the condition")


def genie(mst: Mst, n: int | None = None, g: float = 0.3) -> MergeHistory:
    """Genie merge order over a minimum spanning tree.

    While the Gini index of the cluster sizes is at most ``g`` the globally
    cheapest remaining MST edge is merged; otherwise the cheapest edge with
    an endpoint in a smallest cluster is merged.  ``g = 1`` gives single
    linkage.
    """
    n = mst.n if n is None else n
    if not 0 < g <= 1:
        raise ConfigurationError(f"threshold must be in (0, 1], got {g}")
    if len(mst.edges) != n - 1:
        raise InternalConsistencyError("MST does not span all objects")
    hb = _HistoryBuilder(n)
    ds = hb.ds
    size = ds.size
    find = ds.find_set
    tracker = GiniTracker(n)
    pq = ConditionalPq(mst.edges)

    for _ in range(n - 1):
        if tracker.g <= g:
            e = pq.pop()
        else:
            ms = ds.min_size()

            def smallest(e, ms=ms):
                return size[find(e.index1)] == ms or size[find(e.index2)] == ms

            e = pq.pop_conditional(smallest, state=ms)
        s1, s2 = size[find(e.index1)], size[find(e.index2)]
        hb.link(e.index1, e.index2, e.dist)
        tracker.merge(s1, s2)
    return hb.result()


def single_linkage(mst: Mst, n: int | None = None) -> MergeHistory:
    """Merge MST edges in ascending ``(dist, index1, index2)`` order."""
    n = mst.n if n is None else n
    hb = _HistoryBuilder(n)
    for e in mst.sorted_edges():
        hb.link(e.index1, e.index2, e.dist)
    return hb.result()


def _criterion(scheme, stat, within, sizes, u, others):
    """Linkage value between cluster ``u`` and each cluster in ``others``."""
    if scheme in ("single", "complete"):
        return stat[u, others]
    su, so = sizes[u], sizes[others]
    if scheme == "average":
        return stat[u, others] / (su * so)
    # Ward, written with squared dissimilarities; within[] sums over ordered pairs
    return (2.0 * stat[u, others] - so / su * within[u]
            - su / so * within[others]) / (su + so)


def classic_linkage(space: MetricSpace, scheme: str = "complete",
                    max_n: int = DEFAULT_MAX_N) -> MergeHistory:
    """Complete, average, Ward (or single) linkage on the full distance matrix.

    Per pair of clusters the cross statistic (max, min, sum of ``d`` or sum
    of ``d**2``) is maintained exactly and the linkage value is evaluated
    from its defining formula.  Ties go to the pair of clusters whose
    smallest members come first.  Uses O(n**2) memory.
    """
    if scheme not in CLASSIC_SCHEMES:
        raise ConfigurationError(f"unknown linkage scheme {scheme!r}")
    n = space.n
    if n > max_n:
        raise ResourceLimitError(
            f"{scheme} linkage needs the full distance matrix; n={n} exceeds "
            f"the cap of {max_n}")
    D = np.zeros((n, n))
    for i in range(n - 1):
        D[i, i + 1:] = space.d_many(i, np.arange(i + 1, n))
    D += D.T

    stat = D * D if scheme == "ward" else D
    within = np.zeros(n)
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)

    # Q[r, c] for r < c holds the linkage value; slot r holds the cluster
    # whose smallest member is r.
    Q = np.full((n, n), np.inf)
    iu = np.triu_indices(n, 1)
    Q[iu] = _criterion_all(scheme, stat, within, sizes)[iu]
    rowmin = np.full(n, np.inf)
    rowarg = np.full(n, -1)
    for r in range(n - 1):
        c = np.argmin(Q[r, r + 1:]) + r + 1
        rowmin[r], rowarg[r] = Q[r, c], c

    hb = _HistoryBuilder(n)
    for _ in range(n - 1):
        u = int(np.argmin(rowmin))
        v = int(rowarg[u])
        if v < 0:
            raise InternalConsistencyError("no pair left to merge")
        hb.link(u, v, float(Q[u, v]))

        # fold v into u
        if scheme == "single":
            stat[u] = np.minimum(stat[u], stat[v])
        elif scheme == "complete":
            stat[u] = np.maximum(stat[u], stat[v])
        else:
            within[u] = within[u] + within[v] + 2.0 * stat[u, v]
            stat[u] = stat[u] + stat[v]
        stat[:, u] = stat[u]
        sizes[u] += sizes[v]
        active[v] = False
        Q[v, :] = np.inf
        Q[:, v] = np.inf
        rowmin[v], rowarg[v] = np.inf, -1

        others = np.flatnonzero(active)
        others = others[others != u]
        if len(others) == 0:
            break
        vals = _criterion(scheme, stat, within, sizes, u, others)
        lo, hi = others[others < u], others[others > u]
        Q[lo, u] = vals[others < u]
        Q[u, hi] = vals[others > u]

        if len(hi):
            c = np.argmin(Q[u, u + 1:]) + u + 1
            rowmin[u], rowarg[u] = Q[u, c], c
        else:
            rowmin[u], rowarg[u] = np.inf, -1
        for r in lo.tolist():
            if rowarg[r] in (u, v):
                c = np.argmin(Q[r, r + 1:]) + r + 1
                rowmin[r], rowarg[r] = Q[r, c], c
            elif Q[r, u] < rowmin[r] or (Q[r, u] == rowmin[r] and u < rowarg[r]):
                rowmin[r], rowarg[r] = Q[r, u], u
        for r in np.flatnonzero(active & (rowarg == v)).tolist():
            c = np.argmin(Q[r, r + 1:]) + r + 1
            rowmin[r], rowarg[r] = Q[r, c], c
    return hb.result()


def _criterion_all(scheme, stat, within, sizes):
    if scheme in ("single", "complete"):
        return stat.copy()
    s = np.outer(sizes, sizes)
    if scheme == "average":
        return stat / s
    return (2.0 * stat - sizes[None, :] / sizes[:, None] * within[:, None]
            - sizes[:, None] / sizes[None, :] * within[None, :]) \
        / (sizes[:, None] + sizes[None, :])


def cut(history: MergeHistory, k: int) -> np.ndarray:
    """Labels ``1 .. k`` after undoing the last ``k - 1`` merges.

    Merges are undone in the order they were made, not by height.  Clusters
    are numbered by their smallest member.
    """
    n = history.n
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    ds = SizedDisjointSets(n)
    for i, j in history.endpoints[: n - k].tolist():
        ds.link(i, j)
    labels = np.empty(n, dtype=np.int64)
    seen = {}
    for x in range(n):
        r = ds.find_set(x)
        if r not in seen:
            seen[r] = len(seen) + 1
        labels[x] = seen[r]
    return labels


@dataclass
class AlgorithmConfig:
    """What to run: ``algorithm`` is one of :data:`ALGORITHMS`; ``g`` and
    ``backend`` only matter for the MST-based ones."""

    algorithm: str = "genie"
    g: float = 0.3
    backend: str = "prim"
    threads: int = 1
    seed: int | None = None
    max_n: int = DEFAULT_MAX_N

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(
                f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.algorithm == "genie" and not 0 < self.g <= 1:
            raise ConfigurationError(f"threshold must be in (0, 1], got {self.g}")
        if self.backend not in ("prim", "vptree"):
            raise ConfigurationError(f"unknown MST backend {self.backend!r}")
        if self.threads < 1:
            raise ConfigurationError("threads must be at least 1")

    @property
    def label(self) -> str:
        return f"genie_{self.g:g}" if self.algorithm == "genie" else self.algorithm


def hclust(space: MetricSpace, config: AlgorithmConfig | None = None,
           **kwargs) -> MergeHistory:
    """Cluster the objects of ``space`` and return the merge history."""
    if config is None:
        config = AlgorithmConfig(**kwargs)
    if config.algorithm in ("genie", "single"):
        mst = build_mst(space, config.backend, threads=config.threads,
                        seed=config.seed)
        if config.algorithm == "single":
            return single_linkage(mst, space.n)
        return genie(mst, space.n, config.g)
    return classic_linkage(space, config.algorithm, max_n=config.max_n)
