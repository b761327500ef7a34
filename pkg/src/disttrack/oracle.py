"""Exact ground truth over the whole multiset, for continuous verification."""
from __future__ import annotations

from fractions import Fraction

from .core import as_fraction, check_item
from .keyindex import KeyIndex


class ExactOracle:
    def __init__(self, u):
        self.u = u
        self.counts = [0] * (u + 1)
        self.total = 0
        self.index = KeyIndex(u)
        self._watches: list[HeavyWatch] = []

    def insert(self, value, seq=None):
        check_item(value, self.u)
        if seq is None:
            seq = self.total
        self.counts[value] += 1
        self.total += 1
        self.index.insert(value, seq)
        for w in self._watches:
            w.observe(value, self.counts[value], self.total)
        return self

    def count(self, value):
        return self.counts[value]

    def rank(self, key):
        """Number of items strictly below ``key`` under the (value, seq) order."""
        return self.index.rank(key)

    def count_range(self, lo, hi):
        return self.index.count_range(lo, hi)

    def less_than(self, value):
        return self.index.count_below_value(value)

    def watch_heavy(self, phi) -> HeavyWatch:
        """Incrementally maintained set of items with m_x >= phi*|A|."""
        w = HeavyWatch(phi)
        for x in range(1, self.u + 1):
            if self.counts[x]:
                w.observe(x, self.counts[x], self.total)
        self._watches.append(w)
        return w

    def admissible_hh(self, phi, eps):
        """(mandatory, forbidden) among observed items.

        Items never observed are forbidden as well whenever phi > eps.
        """
        if self.total < 1:
            raise ValueError("empty multiset")
        phi, eps = as_fraction(phi), as_fraction(eps)
        n = self.total
        mandatory, forbidden = set(), set()
        for x in range(1, self.u + 1):
            c = self.counts[x]
            if not c:
                continue
            if c >= phi * n:
                mandatory.add(x)
            elif c < (phi - eps) * n:
                forbidden.add(x)
        return mandatory, forbidden

    def is_forbidden(self, value, phi, eps):
        return self.counts[value] < (as_fraction(phi) - as_fraction(eps)) * self.total

    def quantile_ok(self, value, phi, eps):
        """Whether ``value`` is a phi'-quantile for some phi' within eps of phi."""
        n = self.total
        less = self.less_than(value)
        greater = n - less - self.counts[value]
        phi, eps = as_fraction(phi), as_fraction(eps)
        lo = max(Fraction(less, n), phi - eps, Fraction(0))
        hi = min(1 - Fraction(greater, n), phi + eps, Fraction(1))
        return lo <= hi

    def admissible_quantile(self, phi, eps):
        """Inclusive (lo, hi) value range of admissible phi-quantiles.

        x qualifies iff less(x) <= (phi+eps)|A| and greater(x) <= (1-phi+eps)|A|;
        less is non-decreasing and greater non-increasing in x, so the
        qualifying values form a range found by two binary searches.
        """
        if self.total < 1:
            raise ValueError("empty multiset")
        phi, eps = as_fraction(phi), as_fraction(eps)
        n = self.total
        max_less = (phi + eps) * n
        max_greater = (1 - phi + eps) * n

        def greater(x):
            return n - self.less_than(x + 1)

        # hi: the largest x with less(x) <= max_less (less(1) = 0 always qualifies)
        a, b = 1, self.u
        while a < b:
            mid = (a + b + 1) // 2
            if self.less_than(mid) <= max_less:
                a = mid
            else:
                b = mid - 1
        hi = a
        # lo: the smallest x with greater(x) <= max_greater
        a, b = 1, self.u
        while a < b:
            mid = (a + b) // 2
            if greater(mid) <= max_greater:
                b = mid
            else:
                a = mid + 1
        lo = a
        if lo > hi or greater(lo) > max_greater:
            return None
        return lo, hi


class HeavyWatch:
    """Superset-pruned set of phi-heavy items.

    An item can only become heavy on its own arrival, so candidates are added
    on arrival and pruned lazily when the total grows past them.
    """

    def __init__(self, phi):
        f = as_fraction(phi)
        self._p, self._q = f.numerator, f.denominator
        self._cand = set()

    def observe(self, value, count, total):
        if count * self._q >= self._p * total:
            self._cand.add(value)

    def current(self, counts, total):
        p, q = self._p, self._q
        drop = [x for x in self._cand if counts[x] * q < p * total]
        for x in drop:
            self._cand.discard(x)
        return self._cand
