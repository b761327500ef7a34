"""Exact order statistics over (value, seq) keys drawn from 1..u."""
from bisect import bisect_left

from . import fenwick


class KeyIndex:
    """Multiset of keys with O(log u) rank, select and range counts.

    Values live in a Fenwick tree; ties on a value are ordered by arrival
    seq, which only ever grows, so each per-value list stays sorted by
    appending.
    """

    __slots__ = ("u", "_fen", "_seqs")

    def __init__(self, u):
        self.u = u
        self._fen = fenwick.FenwickTree(u)
        self._seqs = {}

    def __len__(self):
        return self._fen.total

    def insert(self, value, seq):
        self._fen.add(value, 1)
        lst = self._seqs.get(value)
        if lst is None:
            self._seqs[value] = [seq]
        else:
            lst.append(seq)

    def count_value(self, value):
        lst = self._seqs.get(value)
        return len(lst) if lst else 0

    def values(self):
        """Distinct values stored."""
        return self._seqs.keys()

    def count_below_value(self, value):
        """Number of keys whose value is < ``value``."""
        return self._fen.prefix(value - 1)

    def rank(self, key):
        """Number of stored keys strictly smaller than ``key``."""
        value, seq = key
        if value < 1:
            return 0
        if value > self.u:
            return self._fen.total
        below = self._fen.prefix(value - 1)
        lst = self._seqs.get(value)
        if not lst:
            return below
        if seq > lst[-1]:
            return below + len(lst)
        return below + bisect_left(lst, seq)

    def count_range(self, lo, hi):
        """Keys in the half-open key interval [lo, hi)."""
        return self.rank(hi) - self.rank(lo)

    def select(self, i):
        """The i-th smallest key, 0-based."""
        value = self._fen.find_kth(i + 1)
        offset = i - self._fen.prefix(value - 1)
        return (value, self._seqs[value][offset])

    def sample(self, lo, hi, spacing):
        """Keys of [lo, hi) at local positions spacing, 2*spacing, ... (1-based).

        Returns (count, [(key, rank_within)]) where rank_within is the exact
        number of keys in [lo, key).
        """
        base = self.rank(lo)
        count = self.rank(hi) - base
        out = []
        pos = spacing
        while pos <= count:
            out.append((self.select(base + pos - 1), pos - 1))
            pos += spacing
        return count, out
