"""Pure-Python Fenwick tree over positions 1..size (fallback kernel)."""


class FenwickTree:
    __slots__ = ("size", "total", "_tree", "_top")

    def __init__(self, size):
        if size < 1:
            raise ValueError("size must be >= 1")
        self.size = size
        self.total = 0
        self._tree = [0] * (size + 1)
        top = 1
        while top * 2 <= size:
            top *= 2
        self._top = top

    def add(self, i, delta=1):
        if i < 1 or i > self.size:
            raise IndexError(i)
        self.total += delta
        tree = self._tree
        n = self.size
        while i <= n:
            tree[i] += delta
            i += i & -i

    def prefix(self, i):
        """Sum of positions 1..i; clipped to [0, total] outside the range."""
        if i <= 0:
            return 0
        if i >= self.size:
            return self.total
        tree = self._tree
        s = 0
        while i > 0:
            s += tree[i]
            i -= i & -i
        return s

    def find_kth(self, k):
        """Smallest position whose prefix sum reaches k (1 <= k <= total)."""
        if k < 1 or k > self.total:
            raise IndexError(k)
        tree = self._tree
        pos = 0
        step = self._top
        n = self.size
        while step:
            nxt = pos + step
            if nxt <= n and tree[nxt] < k:
                pos = nxt
                k -= tree[nxt]
            step >>= 1
        return pos + 1
