"""Executable lower-bound constructions.

``HHLowerBoundPlan`` alternates two groups of l items between frequency phi
and phi - 2*eps of the current size; ``MedianLowerBoundPlan`` flips the
majority of a two-value stream every round.  ``WhiteboxAttack`` places the
copies of each promoted item so as to force as many sites as possible to
speak, using the tracker's per-site trigger thresholds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import as_fraction, ceil_frac


def _lcm(a, b):
    return a * b // math.gcd(a, b)


@dataclass(frozen=True)
class Block:
    round: int
    item: int
    start: int  # stream index of the first copy
    copies: int
    size_before: int  # |A| when the round started


class HHLowerBoundPlan:
    """Rounds for the heavy-hitter construction.

    Groups S_0 = {1..l} and S_1 = {l+1..2l}.  At the start of round i the
    group i mod 2 has frequency phi*m_i per item and the other group
    (phi - eps')*m_i with eps' = 2*eps; the round adds ceil(beta*m_i) copies
    of each item of the other group, which swaps the roles.
    """

    def __init__(self, phi, eps, n, m0=None):
        phi, eps = as_fraction(phi), as_fraction(eps)
        if not 0 < eps < phi <= 1:
            raise ValueError("need 0 < eps < phi <= 1")
        ep = 2 * eps
        if 2 * phi - ep <= 0:
            raise ValueError("need 2*phi > 2*eps")
        l = 1 / (2 * phi - ep)
        if l.denominator != 1:
            raise ValueError(
                f"1/(2*phi - 2*eps) = {l} is not an integer; admissible pairs satisfy "
                f"phi = (1/l + 2*eps)/2 for a positive integer l, e.g. "
                f"phi = {(Fraction(1, max(1, math.floor(l))) + ep) / 2} or "
                f"phi = {(Fraction(1, math.ceil(l)) + ep) / 2} at eps = {eps}")
        if phi <= 3 * eps:
            raise ValueError("the construction needs phi > 3*eps")
        self.phi, self.eps, self.eps2 = phi, eps, ep
        self.l = int(l)
        self.beta = ep * (2 * phi - ep) / (phi - ep)
        self.growth = phi / (phi - ep)
        self.n = n
        unit = _lcm(phi.denominator, (phi - ep).denominator)
        want = max(100, m0 or 0)
        self.m0 = unit * math.ceil(want / unit)
        self._items = None
        self._blocks = None

    def group(self, b):
        return list(range(1 + b * self.l, 1 + (b + 1) * self.l))

    def prefix(self):
        """Initial multiset, items interleaved: group 0 heavy."""
        counts = {x: int(self.phi * self.m0) for x in self.group(0)}
        counts.update({x: int((self.phi - self.eps2) * self.m0) for x in self.group(1)})
        out = []
        left = dict(counts)
        while any(left.values()):
            for x in sorted(left):
                if left[x]:
                    out.append(x)
                    left[x] -= 1
        return out

    def _build(self):
        items = self.prefix()
        blocks = []
        i = 0
        while len(items) < self.n:
            m_i = len(items)
            c = ceil_frac(self.beta * m_i)
            for x in self.group(1 - i % 2):
                blocks.append(Block(i, x, len(items), c, m_i))
                items.extend([x] * c)
            i += 1
        self._items = items
        self._blocks = blocks

    def items(self):
        if self._items is None:
            self._build()
        return self._items

    def blocks(self):
        if self._blocks is None:
            self._build()
        return self._blocks

    def rounds(self):
        return len({b.round for b in self.blocks() if b.start < self.n})

    def expected_changes(self):
        """Low-to-heavy transitions the rounds produce: l per completed round."""
        return self.l * math.log(self.n / self.m0) / math.log(self.growth)


def gen_hh_lb_stream(plan: HHLowerBoundPlan, k, placement="rr"):
    """Events of the heavy-hitter construction with round-robin sites."""
    from .core import ArrivalEvent
    if placement != "rr":
        raise ValueError("only round-robin placement is static; use WhiteboxAttack")
    return [ArrivalEvent(i, i % k + 1, x) for i, x in enumerate(plan.items()[:plan.n])]


class MedianLowerBoundPlan:
    """Two values, 1 and 2 (standing for 0 and 1).

    At the start of round i value b (b = i mod 2, mapped to b + 1) has
    frequency (1/2 - 2*eps)*m_i; the round adds ceil(4*eps/(1/2 - 2*eps)*m_i)
    copies of it, after which it holds (1/2 + 2*eps)*m_{i+1}.
    """

    def __init__(self, eps, n, m0=None):
        eps = as_fraction(eps)
        if not 0 < eps < Fraction(1, 8):
            raise ValueError("the median construction needs eps < 1/8")
        self.eps = eps
        self.n = n
        half = Fraction(1, 2)
        self.lo_share = half - 2 * eps
        self.ratio = 4 * eps / self.lo_share
        self.growth = 1 + self.ratio
        unit = self.lo_share.denominator
        want = max(100, m0 or 0)
        self.m0 = unit * math.ceil(want / unit)
        self._items = None

    def prefix(self):
        lo = int(self.lo_share * self.m0)
        hi = self.m0 - lo
        out = []
        for i in range(max(lo, hi)):
            if i < lo:
                out.append(1)
            if i < hi:
                out.append(2)
        return out

    def items(self):
        if self._items is None:
            items = self.prefix()
            i = 0
            while len(items) < self.n:
                c = ceil_frac(self.ratio * len(items))
                items.extend([1 + i % 2] * c)
                i += 1
            self._items = items
        return self._items

    def expected_changes(self):
        return math.log(self.n / self.m0) / math.log(self.growth)


def gen_median_lb_stream(eps, n, k=2):
    from .core import ArrivalEvent
    plan = MedianLowerBoundPlan(eps, n)
    return [ArrivalEvent(i, i % k + 1, x) for i, x in enumerate(plan.items()[:n])]


class HHChangeCounter:
    """Counts items moving from below (phi-eps)|A| to at least phi|A|."""

    def __init__(self, phi, eps):
        phi, eps = as_fraction(phi), as_fraction(eps)
        self._hi = (phi.numerator, phi.denominator)
        self._lo = ((phi - eps).numerator, (phi - eps).denominator)
        self.low = set()
        self.changes = 0
        self.seen = set()

    def observe(self, counts, total):
        p, q = self._hi
        a, b = self._lo
        for x in self.seen:
            c = counts[x]
            if c * b < a * total:
                self.low.add(x)
            elif c * q >= p * total and x in self.low:
                self.low.discard(x)
                self.changes += 1

    def feed(self, items, u, start=0):
        """Feed a whole stream; transitions are counted once |A| > start."""
        counts = [0] * (u + 1)
        total = 0
        for x in items:
            counts[x] += 1
            total += 1
            self.seen.add(x)
            if total < start:
                continue
            if total == start:
                self.low.clear()
                self.changes = 0
            self.observe(counts, total)
        return self.changes


class MedianChangeCounter:
    """Counts changes of the exact median value (the item at rank floor(n/2))."""

    def __init__(self):
        self.current = None
        self.changes = 0

    def feed(self, items, u, start=0):
        """Feed a whole stream; changes are counted once |A| > start."""
        counts = [0] * (u + 1)
        total = 0
        for x in items:
            counts[x] += 1
            total += 1
            target = total // 2
            acc = 0
            med = None
            for v in range(1, u + 1):
                acc += counts[v]
                if acc > target:
                    med = v
                    break
            if self.current is not None and med != self.current and total > start:
                self.changes += 1
            self.current = med
        return self.changes


@dataclass
class Window:
    round: int
    item: int
    chunk: int
    triggered: set
    messages: int = 0
    missed: bool = False
    slack_sum: int = 0  # sum of (n_j - 1) at the window start
    messages_start: int = 0
    copies: int = 0  # copies of the item the block adds
    sent: int = 0  # copies placed before the stream ended

    @property
    def complete(self):
        return self.sent == self.copies


class WhiteboxAttack:
    """Site placement that forces trigger after trigger.

    For each block of copies of a promoted item t the adversary sends chunks
    of ceil(2*beta*m_i/k) copies, each to a site whose remaining copies before
    it must speak (``tracker.threshold_probe(t)``) is at most the chunk size,
    preferring sites not yet triggered in this window.  If no site qualifies
    the window is recorded as a missed change and the rest of its copies go
    round-robin.
    """

    def __init__(self, plan, k, tracker):
        self.plan = plan
        self.k = k
        self.tracker = tracker
        self.windows: list[Window] = []
        self._blocks = {b.start: b for b in plan.blocks()}
        self._block = None
        self._left_in_block = 0
        self._site = None
        self._left_in_chunk = 0
        self._sent_before = 0

    @property
    def failures(self):
        return [w for w in self.windows if w.missed]

    def _close_chunk(self):
        if self._site is None:
            return
        w = self.windows[-1]
        sent = self.tracker.ledger.site_signals[self._site]
        if sent > self._sent_before:
            w.triggered.add(self._site)
        w.messages = self.tracker.ledger.messages - w.messages_start
        self._site = None

    def site(self, i, item):
        led = self.tracker.ledger
        b = self._blocks.get(i)
        if b is not None:
            self._close_chunk()
            chunk = ceil_frac(2 * self.plan.beta * b.size_before / self.k)
            probe = self.tracker.threshold_probe(item)
            w = Window(b.round, item, chunk, set(), slack_sum=sum(p - 1 for p in probe),
                       messages_start=led.messages, copies=b.copies)
            self.windows.append(w)
            self._block = b
            self._left_in_block = b.copies
            self._left_in_chunk = 0
        if self._block is None or self._left_in_block <= 0:
            self._close_chunk()
            return i % self.k
        self._left_in_block -= 1
        w = self.windows[-1]
        w.sent += 1
        if self._left_in_chunk <= 0 and not w.missed:
            self._close_chunk()
            probe = self.tracker.threshold_probe(item)
            eligible = [j for j in range(self.k) if probe[j] <= w.chunk]
            if not eligible:
                w.missed = True
            else:
                fresh = [j for j in eligible if j not in w.triggered]
                self._site = (fresh or eligible)[0]
                self._sent_before = led.site_signals[self._site]
                self._left_in_chunk = w.chunk
        if w.missed:
            return i % self.k
        self._left_in_chunk -= 1
        return self._site

    def finish(self):
        self._close_chunk()
        return self.windows


def whitebox_attack(tracker, plan, k):
    """Drive ``tracker`` through the plan with white-box placement.

    Returns the per-window records (distinct sites triggered, messages,
    missed changes).
    """
    attack = WhiteboxAttack(plan, k, tracker)
    for i, x in enumerate(plan.items()[:plan.n]):
        tracker.receive(attack.site(i, x), x, i)
    return attack.finish()
