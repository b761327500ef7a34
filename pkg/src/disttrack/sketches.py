"""Per-site small-space summaries: Space-Saving and Greenwald-Khanna."""
from __future__ import annotations

import math
from bisect import bisect_left


class SpaceSaving:
    """Space-Saving frequency summary with ``capacity`` monitored counters.

    Counters are kept in count buckets (a stream summary) so the minimum is
    found in O(1).  Within a bucket the oldest entry is evicted first, which
    keeps runs deterministic.
    """

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.n = 0
        self.count: dict = {}
        self.error: dict = {}
        self._buckets: dict[int, dict] = {}
        self._min = 0

    @classmethod
    def for_error(cls, eps):
        return cls(math.ceil(1 / eps))

    def __len__(self):
        return len(self.count)

    def _move(self, x, old, new):
        b = self._buckets[old]
        del b[x]
        if not b:
            del self._buckets[old]
            if old == self._min:
                self._min = new
        self._buckets.setdefault(new, {})[x] = None

    def insert(self, x):
        """Count one arrival of ``x``; returns the evicted item, if any."""
        self.n += 1
        c = self.count.get(x)
        if c is not None:
            self.count[x] = c + 1
            self._move(x, c, c + 1)
            return None
        if len(self.count) < self.capacity:
            self.count[x] = 1
            self.error[x] = 0
            self._buckets.setdefault(1, {})[x] = None
            self._min = 1
            return None
        low = self._min
        bucket = self._buckets[low]
        victim = next(iter(bucket))
        del self.count[victim]
        del self.error[victim]
        self.count[x] = low
        self.error[x] = low
        bucket[x] = None
        del bucket[victim]
        self._move(x, low, low + 1)
        self.count[x] = low + 1
        return victim

    def min_count(self):
        return self._min if len(self.count) >= self.capacity else 0

    def estimate(self, x):
        """(lower, upper) bracket on the true count of ``x``."""
        c = self.count.get(x)
        if c is None:
            return 0, self.min_count()
        return c - self.error[x], c

    def lower(self, x):
        c = self.count.get(x)
        return 0 if c is None else c - self.error[x]

    def items(self):
        return self.count.items()


class GKSketch:
    """Greenwald-Khanna rank summary over comparable keys.

    Tuples (value, g, delta) are stored in parallel lists.  The invariant
    g + delta <= max(1, floor(2*eps*n)) bounds every rank query's error by
    eps*n.  Compression runs every floor(1/(2*eps)) inserts.
    """

    def __init__(self, eps):
        if not 0 < eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        self.eps = eps
        self.n = 0
        self.values: list = []
        self.g: list[int] = []
        self.delta: list[int] = []
        self._period = max(1, int(1 / (2 * eps)))

    def __len__(self):
        return len(self.values)

    def _cap(self):
        return max(1, int(2 * self.eps * self.n))

    def insert(self, v):
        self.n += 1
        vals = self.values
        i = bisect_left(vals, v)
        if i == 0 or i == len(vals):
            d = 0
        else:
            d = self.g[i] + self.delta[i] - 1
        vals.insert(i, v)
        self.g.insert(i, 1)
        self.delta.insert(i, d)
        if self.n % self._period == 0:
            self.compress()

    def compress(self):
        cap = self._cap()
        vals, g, delta = self.values, self.g, self.delta
        i = len(vals) - 2
        while i >= 1:
            if g[i] + g[i + 1] + delta[i + 1] <= cap:
                g[i + 1] += g[i]
                del vals[i], g[i], delta[i]
            i -= 1

    def invariant_ok(self):
        cap = self._cap()
        return all(gi + di <= cap for gi, di in zip(self.g, self.delta)) \
            and sum(self.g) == self.n

    def rank(self, v):
        """Estimated number of inserted keys strictly below ``v``."""
        i = bisect_left(self.values, v)
        if i == len(self.values):
            return float(self.n)
        r_prev = sum(self.g[:i])
        r_here = r_prev + self.g[i]
        return (r_prev + r_here + self.delta[i] - 1) / 2

    def sample(self, lo, hi, spacing):
        """Stored keys of [lo, hi) about ``spacing`` ranks apart.

        Returns (estimated count, [(key, estimated rank within [lo, hi))]).
        """
        base = self.rank(lo)
        count = max(0.0, self.rank(hi) - base)
        out = []
        i = bisect_left(self.values, lo)
        last = None
        r_prev = sum(self.g[:i])
        while i < len(self.values) and self.values[i] < hi:
            r_here = r_prev + self.g[i]
            est = (r_prev + r_here + self.delta[i] - 1) / 2 - base
            if est >= spacing - 1 and (last is None or est - last >= spacing):
                out.append((self.values[i], est))
                last = est
            r_prev = r_here
            i += 1
        return count, out
