"""Disjoint sets that also track set sizes, the smallest set size and the
number of sets."""

from __future__ import annotations

from .errors import InternalConsistencyError


class SizedDisjointSets:
    """Union-find over ``0 .. n-1`` with union by rank and path compression.

    Besides ``find_set``/``link`` it answers ``size_of``, ``min_size`` and
    ``set_count``.  The minimum is kept via a ``size -> count`` table and a
    cursor that only ever moves up, since sets never shrink.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.parent = list(range(n))
        self.rank = [0] * n
        self.size = [1] * n
        self._count_by_size = [0] * (n + 1)
        self._count_by_size[1] = n
        self._min = 1
        self._sets = n

    def find_set(self, i: int) -> int:
        parent = self.parent
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def link(self, i: int, j: int) -> int:
        """Merge the sets containing ``i`` and ``j``; return the new root."""
        ri, rj = self.find_set(i), self.find_set(j)
        if ri == rj:
            raise InternalConsistencyError(
                f"objects {i} and {j} are already in one set")
        if self.rank[ri] < self.rank[rj]:
            ri, rj = rj, ri
        elif self.rank[ri] == self.rank[rj]:
            self.rank[ri] += 1
        self.parent[rj] = ri

        cnt = self._count_by_size
        a, b = self.size[ri], self.size[rj]
        cnt[a] -= 1
        cnt[b] -= 1
        cnt[a + b] += 1
        self.size[ri] = a + b
        self._sets -= 1
        while cnt[self._min] == 0:
            self._min += 1
        return ri

    def size_of(self, i: int) -> int:
        return self.size[self.find_set(i)]

    def min_size(self) -> int:
        return self._min

    def set_count(self) -> int:
        return self._sets

    def same_set(self, i: int, j: int) -> bool:
        return self.find_set(i) == self.find_set(j)

    def sizes(self) -> list:
        """Sizes of all current sets, in root order."""
        return [self.size[r] for r in range(self.n) if self.parent[r] == r]

    def __repr__(self):
        return (f"SizedDisjointSets(n={self.n}, sets={self._sets}, "
                f"min_size={self._min})")
