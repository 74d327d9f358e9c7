"""Vantage-point tree serving per-object "next nearest neighbour" streams.

The tree answers, for an object ``i``, the sequence of objects ``j > i`` in
increasing order of ``d(i, j)`` (ties broken by ``j``).  Three tweaks make it
suitable for building a minimum spanning tree:

* every node knows the largest object index below it, so subtrees holding
  only indices ``<= i`` are skipped and ``d(i, j)`` is never evaluated for
  ``j <= i``;
* every node carries a ``same_set`` flag, raised lazily once a traversal has
  verified that all of its objects belong to one disjoint set; during the
  merge phase such subtrees are skipped when they are in ``i``'s own set;
* neighbours are fetched in batches (20 up to 256 per object, growing when
  the search prunes well) and cached in one small heap per object.
"""

from __future__ import annotations

import heapq
import random
from bisect import bisect_right

import numpy as np

from .metrics import MetricSpace

LEAF_SIZE = 16
MIN_BATCH = 20
MAX_BATCH = 256

# Relative slack on triangle-inequality bounds; pruning errs on the safe side.
_EPS = 1e-9


class VpNode:
    __slots__ = ("vp", "radius", "inner", "outer", "in_lo", "in_hi",
                 "out_lo", "out_hi", "max_index", "same_set", "members", "rep")

    def __init__(self):
        self.vp = -1
        self.radius = 0.0
        self.inner = self.outer = None
        self.in_lo = self.in_hi = self.out_lo = self.out_hi = 0.0
        self.max_index = -1
        self.same_set = False
        self.members = None
        self.rep = -1

    @property
    def is_leaf(self) -> bool:
        return self.members is not None

    def objects(self):
        """All object indices in this subtree."""
        if self.members is not None:
            return list(self.members)
        out = [self.vp]
        for child in (self.inner, self.outer):
            if child is not None:
                out.extend(child.objects())
        return out


def _leaf(objs) -> VpNode:
    node = VpNode()
    node.members = tuple(sorted(int(o) for o in objs))
    node.max_index = node.members[-1]
    node.rep = node.members[0]
    node.same_set = len(node.members) == 1
    return node


class VpTree:
    """VP-tree over the objects of a :class:`MetricSpace`.

    The metric must satisfy the triangle inequality.  Each node splits its
    objects at the median distance to a vantage point; distance evaluations
    made while building are counted.

    By default the vantage point is the node's largest object index.  A
    search on behalf of ``i`` only enters nodes holding some index above
    ``i``, so it can always afford ``d(i, vantage)`` and prune both children.
    A randomly chosen vantage point with index ``<= i`` gives no bound at
    all.  On shuffled input the largest index is itself a random member.

    Parameters
    ----------
    space : MetricSpace
    leaf_size : int
    seed : int, optional
        Only used with ``vantage="random"``.
    vantage : {"max_index", "random"}
    """

    def __init__(self, space: MetricSpace, leaf_size: int = LEAF_SIZE, seed=None,
                 vantage: str = "max_index"):
        if vantage not in ("max_index", "random"):
            raise ValueError(f"unknown vantage point rule {vantage!r}")
        self.space = space
        self.n = space.n
        self.leaf_size = max(1, int(leaf_size))
        self.vantage = vantage
        self._rng = random.Random(seed)
        self.root = self._build(np.arange(self.n, dtype=np.intp))

        n = self.n
        self._cache = [[] for _ in range(n)]
        self._cursor = [(-np.inf, -1)] * n
        self._exhausted = [False] * n
        self._batch = [MIN_BATCH] * n

    def _build(self, objs) -> VpNode:
        if len(objs) <= self.leaf_size:
            return _leaf(objs)
        if self.vantage == "max_index":
            p = int(np.argmax(objs))
        else:
            p = self._rng.randrange(len(objs))
        vp = int(objs[p])
        rest = np.delete(objs, p)
        dist = self.space.d_many(vp, rest)
        radius = float(np.median(dist))
        inside = dist < radius
        if not inside.any() or inside.all():
            # all distances tied: no proper split exists
            return _leaf(objs)
        node = VpNode()
        node.vp = vp
        node.rep = vp
        node.radius = radius
        node.max_index = int(objs.max())
        din, dout = dist[inside], dist[~inside]
        node.in_lo, node.in_hi = float(din.min()), float(din.max())
        node.out_lo, node.out_hi = float(dout.min()), float(dout.max())
        node.inner = self._build(rest[inside])
        node.outer = self._build(rest[~inside])
        return node

    # ------------------------------------------------------------------
    # searching

    def _search(self, q, above, k, lower_d=-np.inf, lower_j=-1, ds=None):
        """Return the ``k`` smallest ``(d, j)`` with ``j > above``, ``j != q``
        and ``(d, j) > (lower_d, lower_j)``, ascending.

        With ``ds`` given, objects in ``q``'s set are skipped.  Also returns
        ``(considered, pruned)`` child-visit counts.
        """
        dist = self.space.d
        d_many = self.space.d_many
        vectorised = self.space.vectorised
        heap = []  # max-heap on (d, j) via negation
        stats = [0, 0]
        find = ds.find_set if ds is not None else None
        rq = find(q) if ds is not None else -1

        def offer(d, j):
            if d < lower_d or (d == lower_d and j <= lower_j):
                return
            if len(heap) < k:
                heapq.heappush(heap, (-d, -j))
            else:
                td, tj = heap[0]
                if d < -td or (d == -td and j < -tj):
                    heapq.heapreplace(heap, (-d, -j))

        def visit(node):
            if node.members is not None:
                members = node.members
                roots = None
                if find is not None:
                    roots = [find(j) for j in members]
                    r0 = roots[0]
                    if not node.same_set and all(r == r0 for r in roots):
                        node.same_set = True
                    if node.same_set and r0 == rq:
                        return
                todo = [members[pos]
                        for pos in range(bisect_right(members, above), len(members))
                        if members[pos] != q
                        and (roots is None or roots[pos] != rq)]
                if len(todo) > 2 and vectorised:
                    for d, j in zip(d_many(q, todo).tolist(), todo):
                        offer(d, j)
                else:
                    for j in todo:
                        offer(dist(q, j), j)
                return

            vp = node.vp
            children = ((node.inner, node.in_lo, node.in_hi),
                        (node.outer, node.out_lo, node.out_hi))
            if vp > above:
                if vp == q:
                    dq = 0.0
                else:
                    dq = dist(q, vp)
                    if find is None or find(vp) != rq:
                        offer(dq, vp)
                if dq >= node.radius:
                    children = children[::-1]
                for child, lo, hi in children:
                    stats[0] += 1
                    if child.max_index <= above or _skip_same(child):
                        stats[1] += 1
                        continue
                    lb = max(lo - dq, dq - hi)
                    if len(heap) == k and lb > -heap[0][0] * (1 + _EPS) + _EPS:
                        stats[1] += 1
                        continue
                    if (dq + hi) * (1 + _EPS) + _EPS < lower_d:
                        stats[1] += 1
                        continue
                    visit(child)
            else:
                for child, _, _ in children:
                    stats[0] += 1
                    if child.max_index <= above or _skip_same(child):
                        stats[1] += 1
                        continue
                    visit(child)

            if find is not None and not node.same_set:
                inner, outer = node.inner, node.outer
                if inner.same_set and outer.same_set:
                    r = find(vp)
                    if find(inner.rep) == r and find(outer.rep) == r:
                        node.same_set = True

        def _skip_same(node):
            return find is not None and node.same_set and find(node.rep) == rq

        root = self.root
        if root.max_index > above and not _skip_same(root):
            visit(root)
        out = sorted((-d, -j) for d, j in heap)
        return out, stats

    def knn(self, q: int, k: int):
        """The ``k`` nearest neighbours of ``q`` (excluding ``q``) as
        ``(distance, index)`` pairs."""
        return self._search(q, -1, k)[0]

    def range_query(self, q: int, radius: float):
        """All ``(distance, index)`` with ``index != q`` and
        ``distance <= radius``, ascending."""
        k = 16
        while True:
            res = self._search(q, -1, k)[0]
            if len(res) < k or res[-1][0] > radius:
                return [(d, j) for d, j in res if d <= radius]
            k *= 2

    def next_nearest_neighbor(self, i: int, ds=None):
        """Next not-yet-returned ``(j, d)`` with ``j > i``, or ``None``.

        Pass ``ds`` (a :class:`SizedDisjointSets`) only in the merge phase of
        the MST construction: objects already in ``i``'s set are then skipped.
        """
        cache = self._cache[i]
        while True:
            while cache:
                d, j = heapq.heappop(cache)
                if ds is not None and ds.find_set(i) == ds.find_set(j):
                    continue
                return j, d
            if self._exhausted[i]:
                return None
            batch = self._batch[i]
            lower_d, lower_j = self._cursor[i]
            res, (considered, pruned) = self._search(i, i, batch, lower_d,
                                                     lower_j, ds)
            if len(res) < batch:
                self._exhausted[i] = True
            if considered and 2 * pruned >= considered:
                self._batch[i] = min(MAX_BATCH, 2 * batch)
            if res:
                self._cursor[i] = res[-1]
                cache.extend(res)  # ascending list is a valid heap
            elif self._exhausted[i]:
                return None

    def mark_linked(self, ds, i: int, j: int) -> None:
        """Note that ``i`` and ``j`` were just linked in ``ds``.

        Flags are refreshed lazily by later queries, and linking can only turn
        a ``same_set`` flag from false to true, so nothing is invalidated.
        """

    def cache_size(self) -> int:
        return sum(len(c) for c in self._cache)

    def reset_streams(self) -> None:
        n = self.n
        self._cache = [[] for _ in range(n)]
        self._cursor = [(-np.inf, -1)] * n
        self._exhausted = [False] * n
        self._batch = [MIN_BATCH] * n

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if node.members is None:
                stack.append(node.inner)
                stack.append(node.outer)


def build(space: MetricSpace, leaf_size: int = LEAF_SIZE, seed=None,
          vantage: str = "max_index") -> VpTree:
    return VpTree(space, leaf_size=leaf_size, seed=seed, vantage=vantage)
