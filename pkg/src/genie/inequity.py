"""Inequity indices of cluster-size distributions.

Both indices map a tuple of non-negative integers to ``[0, 1]``: 0 for a
perfectly even distribution, 1 for ``(n, 0, ..., 0)``.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from .errors import InternalConsistencyError


def gini(sizes) -> float:
    """Normalised Gini index.

    ``sum_{i<j} |x_i - x_j| / ((m - 1) * sum x)``; a single entry (or an
    all-zero tuple) yields 0.
    """
    x = np.sort(np.asarray(sizes, dtype=np.float64))
    m = len(x)
    if m == 0:
        raise ValueError("gini of an empty distribution")
    total = x.sum()
    if m == 1 or total == 0:
        return 0.0
    # for sorted x, sum_{i<j} (x_j - x_i) = sum_j (2j - m + 1) x_j
    coef = 2.0 * np.arange(m) - m + 1
    return float(np.dot(coef, x) / ((m - 1) * total))


def bonferroni(sizes) -> float:
    """Normalised Bonferroni index.

    Entries are sorted non-increasingly first; a single entry yields 0.
    """
    x = np.sort(np.asarray(sizes, dtype=np.float64))[::-1]
    m = len(x)
    if m == 0:
        raise ValueError("bonferroni of an empty distribution")
    total = x.sum()
    if m == 1 or total == 0:
        return 0.0
    # tail[i] = sum_{j >= i} x_j, weighted by 1 / (m - i) with 0-based i
    tail = np.cumsum(x[::-1])[::-1]
    s = np.sum(tail / np.arange(m, 0, -1))
    return float(m / (m - 1) * (1.0 - s / total))


class GiniTracker:
    """Gini index of a size distribution, updated in place after each merge.

    The pairwise absolute-difference sum is kept as an exact integer, and
    sizes are stored as a ``size -> multiplicity`` table, so one update costs
    O(number of distinct sizes).

    Parameters
    ----------
    n : int
        Number of objects; the tracker starts from ``n`` singletons.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.j = 0
        self.freq = Counter({1: n})
        self._abs_sum = 0

    @property
    def cluster_count(self) -> int:
        return self.n - self.j

    @property
    def g(self) -> float:
        m = self.n - self.j
        if m <= 1:
            return 0.0
        return self._abs_sum / ((m - 1) * self.n)

    def sizes(self) -> list:
        """Current sizes in non-increasing order."""
        out = []
        for s in sorted(self.freq, reverse=True):
            out.extend([s] * self.freq[s])
        return out

    def merge(self, s1: int, s2: int) -> float:
        """Replace clusters of sizes ``s1`` and ``s2`` by one of ``s1 + s2``.

        Returns the updated index.
        """
        freq = self.freq
        if freq.get(s1, 0) < 1 or freq.get(s2, 0) < (2 if s1 == s2 else 1):
            raise InternalConsistencyError(
                f"sizes {s1} and {s2} are not both present")
        s = s1 + s2
        # Sum over all current clusters (the two merged ones included) of
        # |c - s| - |c - s1| - |c - s2|; the merged clusters' own terms are
        # compensated by the -s1 - s2 + |s1 - s2| correction.
        delta = 0
        for c, f in freq.items():
            delta += f * (abs(c - s) - abs(c - s1) - abs(c - s2))
        self._abs_sum += delta - s1 - s2 + abs(s1 - s2)

        for c in (s1, s2):
            freq[c] -= 1
            if freq[c] == 0:
                del freq[c]
        freq[s] += 1
        self.j += 1
        if self._abs_sum < 0:
            raise InternalConsistencyError("negative Gini numerator")
        return self.g
