"""Exact minimum spanning trees of the complete dissimilarity graph.

Two builders are provided:

``mst_prim``
    Prim-style exhaustive scan evaluating every unordered pair exactly once,
    i.e. ``(n**2 - n) / 2`` dissimilarity calls and O(n) memory.  The inner
    candidate loop can be split across threads.

``mst_kruskal_nn``
    Kruskal-style construction consuming per-object nearest-neighbour
    streams from a :class:`~genie.vptree.VpTree`.
"""

from __future__ import annotations

import heapq
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np

from .errors import InternalConsistencyError
from .metrics import MetricSpace
from .unionfind import SizedDisjointSets
from .vptree import VpTree


class MstEdge(NamedTuple):
    index1: int
    index2: int
    dist: float


class Mst:
    """A spanning tree over ``n`` objects given as ``n - 1`` edges."""

    def __init__(self, edges, n: int):
        self.edges = [MstEdge(*e) for e in edges]
        self.n = n

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    @property
    def total_weight(self) -> float:
        return math.fsum(e.dist for e in self.edges)

    def sorted_edges(self):
        return sorted(self.edges, key=lambda e: (e.dist, e.index1, e.index2))

    def validate(self) -> None:
        """Raise unless the edges form a spanning tree with ``index1 < index2``."""
        if len(self.edges) != self.n - 1:
            raise InternalConsistencyError(
                f"expected {self.n - 1} edges, got {len(self.edges)}")
        ds = SizedDisjointSets(self.n)
        for e in self.edges:
            if not 0 <= e.index1 < e.index2 < self.n:
                raise InternalConsistencyError(f"malformed edge {e}")
            if ds.same_set(e.index1, e.index2):
                raise InternalConsistencyError(f"edge {e} closes a cycle")
            ds.link(e.index1, e.index2)

    def to_text(self) -> str:
        """One ``index1 index2 dist`` line per edge, 1-based indices."""
        return "".join(f"{e.index1 + 1} {e.index2 + 1} {e.dist:.12g}\n"
                       for e in self.edges)

    def __repr__(self):
        return f"Mst(n={self.n}, weight={self.total_weight:.6g})"


def _edge(i, j, d) -> MstEdge:
    i, j = int(i), int(j)
    return MstEdge(i, j, float(d)) if i < j else MstEdge(j, i, float(d))


def _chunks(m, parts):
    bounds = np.linspace(0, m, parts + 1).astype(int)
    return [(bounds[w], bounds[w + 1]) for w in range(parts)
            if bounds[w] < bounds[w + 1]]


def default_threads() -> int:
    env = os.environ.get("GENIE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def mst_prim(space: MetricSpace, threads: int = 1) -> Mst:
    """Prim-style MST performing exactly ``(n**2 - n) / 2`` dissimilarity calls.

    Objects not yet in the tree are kept compacted at the front of a work
    array (swap-with-last removal), so every iteration scans one contiguous
    block.  With ``threads > 1`` that block is cut into per-worker chunks;
    each worker returns its best ``(dist, index)`` candidate and the
    candidates are reduced in worker order, so the output does not depend on
    the thread count.  Ties are broken by the smaller object index.
    """
    n = space.n
    if n == 1:
        return Mst([], 1)
    threads = max(1, int(threads))

    idx = np.arange(1, n, dtype=np.intp)       # objects not yet in the tree
    D = np.full(n - 1, np.inf)                 # distance to nearest tree object
    F = np.full(n - 1, -1, dtype=np.intp)      # that nearest tree object
    vectorised = space.vectorised
    cols = np.array(space.view.columns[:, 1:], order="C") if vectorised else None

    def scan(lastj, lo, hi):
        if vectorised:
            d = space.d_block(lastj, cols[:, lo:hi])
        else:
            d = space.d_many(lastj, idx[lo:hi])
        Dc, Fc = D[lo:hi], F[lo:hi]
        better = d < Dc
        Dc[better] = d[better]
        Fc[better] = lastj
        best = Dc.min()
        ties = np.flatnonzero(Dc == best)
        pos = ties[np.argmin(idx[lo:hi][ties])] + lo
        return best, idx[pos], pos

    edges = []
    lastj = 0
    m = n - 1
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        while m > 0:
            parts = _chunks(m, threads) if pool is not None else [(0, m)]
            if len(parts) > 1:
                found = list(pool.map(lambda r: scan(lastj, *r), parts))
            else:
                found = [scan(lastj, *parts[0])]
            best, bestj, pos = found[0]
            for cand in found[1:]:
                if cand[0] < best or (cand[0] == best and cand[1] < bestj):
                    best, bestj, pos = cand
            assert bestj != 0, "object 0 seeds the tree and is never a candidate"
            edges.append(_edge(F[pos], bestj, D[pos]))
            m -= 1
            if pos != m:
                idx[pos], D[pos], F[pos] = idx[m], D[m], F[m]
                if vectorised:
                    cols[:, pos] = cols[:, m]
            lastj = int(bestj)
    finally:
        if pool is not None:
            pool.shutdown()
    return Mst(edges, n)


def mst_kruskal_nn(space: MetricSpace, tree: VpTree | None = None,
                   ds: SizedDisjointSets | None = None, threads: int = 1,
                   seed=None) -> Mst:
    """Kruskal-style MST fed by nearest-neighbour streams.

    A priority queue holds, for every object ``i``, its next unconsumed
    neighbour ``j > i``.  Popping the globally cheapest pair either links two
    components or is discarded; in both cases the stream of ``i`` is
    advanced.  The initial fetch for all objects is independent per object
    and may run on several threads; the merge phase is sequential.
    """
    n = space.n
    if n == 1:
        return Mst([], 1)
    if tree is None:
        tree = VpTree(space, seed=seed)
    if ds is None:
        ds = SizedDisjointSets(n)
    threads = max(1, int(threads))

    def prefetch(lo, hi):
        out = []
        for i in range(lo, hi):
            nxt = tree.next_nearest_neighbor(i)
            if nxt is not None:
                out.append((nxt[1], i, nxt[0]))
        return out

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda r: prefetch(*r), _chunks(n - 1, threads)))
        pq = [item for part in parts for item in part]
    else:
        pq = prefetch(0, n - 1)
    heapq.heapify(pq)

    edges = []
    while len(edges) < n - 1:
        if not pq:
            raise InternalConsistencyError(
                "neighbour streams exhausted before the tree was spanning")
        d, i, j = heapq.heappop(pq)
        if ds.find_set(i) != ds.find_set(j):
            edges.append(_edge(i, j, d))
            ds.link(i, j)
            tree.mark_linked(ds, i, j)
            if len(edges) == n - 1:
                break
        nxt = tree.next_nearest_neighbor(i, ds)
        if nxt is not None:
            heapq.heappush(pq, (nxt[1], i, nxt[0]))
    return Mst(edges, n)


def build_mst(space: MetricSpace, backend: str = "prim", threads: int = 1,
              seed=None) -> Mst:
    """Dispatch to :func:`mst_prim` or :func:`mst_kruskal_nn`."""
    if backend == "prim":
        return mst_prim(space, threads=threads)
    if backend == "vptree":
        return mst_kruskal_nn(space, threads=threads, seed=seed)
    raise ValueError(f"unknown MST backend {backend!r}")
