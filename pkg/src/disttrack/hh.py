"""Continuous phi-heavy-hitter tracking.

Each site counts arrivals since its last report, overall and per item, and
signals the coordinator whenever a counter reaches eps*S_j.m/(3k), where
S_j.m is the last global count the coordinator broadcast.  After k overall
signals the coordinator polls the exact total and broadcasts it, starting a
new round.  An item is reported heavy when C.m_x / C.m >= phi - eps/2.

In sketch mode a site keeps a Space-Saving summary instead of exact local
frequencies and reports absolute lower bounds, which the coordinator merges
by maximum; the protocol runs at 3eps/4 and the sketches at eps/32.
"""
from __future__ import annotations

from fractions import Fraction

from .core import Kind, ceil_frac, threshold
from .protocol import Tracker, Violation
from .sketches import SpaceSaving


class HHTracker(Tracker):
    name = "hh"

    def __init__(self, config, mode="exact"):
        super().__init__(config, mode)
        config.require_hh()
        eps = config.eps_frac
        self.eps_protocol = eps if mode == "exact" else eps * Fraction(3, 4)
        self.sketch_eps = eps / 32
        k = self.k
        # Heavy iff 2*b*C.m_x >= a*C.m where a/b = 2*phi - eps.
        cut = 2 * config.phi_frac - eps
        self._cut_a, self._cut_b = cut.numerator, cut.denominator
        forbid = config.phi_frac - eps
        self._forbid = (forbid.numerator, forbid.denominator)
        self._eps_ab = (eps.numerator, eps.denominator)

        # site state
        self.site_m = [0] * k  # S_j.m
        self.n_local = [0] * k
        self.dm = [0] * k  # S_j.Delta(m)
        self.dmx = [dict() for _ in range(k)]  # S_j.Delta(m_x), zero entries dropped
        self.thr = 1
        if mode == "sketch":
            cap = ceil_frac(1 / self.sketch_eps)
            self.ss = [SpaceSaving(cap) for _ in range(k)]
            self.last_sent = [dict() for _ in range(k)]
            self.cmxj: dict[int, list[int]] = {}

        # coordinator state
        self.cm = 0
        self.cmx: dict[int, int] = {}
        self.all_signals = 0
        self._cand: set[int] = set()

        self.item_signal_count = 0
        self.all_signal_count = 0
        self.rounds_completed = 0
        self.tight_bound_misses = 0  # informational: the "+k" form of the bounds

    # -- warm-up ---------------------------------------------------------
    def _warm(self, site, value, seq):
        self.n_local[site] += 1
        if self.mode == "sketch":
            self.ss[site].insert(value)
            row = self.cmxj.get(value)
            if row is None:
                row = self.cmxj[value] = [0] * self.k
            row[site] += 1
        self.cm += 1
        self.cmx[value] = self.cmx.get(value, 0) + 1
        self._consider(value)
        self._prune()

    def start(self):
        m = self.cm
        self.ledger.broadcast(Kind.BROADCAST_STATE, 1)
        if self.mode == "sketch":
            for j in range(self.k):
                self.last_sent[j] = {x: c - self.ss[j].error[x]
                                     for x, c in self.ss[j].items()}
        self._set_site_estimate(m)

    def _set_site_estimate(self, m):
        for j in range(self.k):
            self.site_m[j] = m
            self.dm[j] = 0
        self.thr = threshold(self.eps_protocol * m / (3 * self.k))
        self.round += 1
        self.ledger.snapshot_round(self.round)

    # -- protocol --------------------------------------------------------
    def _receive(self, j, x, seq):
        self.n_local[j] += 1
        t = self.thr
        if self.mode == "exact":
            dmx = self.dmx[j]
            dx = dmx.get(x, 0) + 1
            if dx >= t:
                dmx.pop(x, None)
                self._item_signal(j, x, t)
            else:
                dmx[x] = dx
        else:
            self._sketch_arrival(j, x, t)
        d = self.dm[j] + 1
        if d >= t:
            self.dm[j] = 0
            self._all_signal(j, t)
        else:
            self.dm[j] = d

    def _sketch_arrival(self, j, x, t):
        ss = self.ss[j]
        sent = self.last_sent[j]
        victim = ss.insert(x)
        if victim is not None:
            sent.pop(victim, None)
        low = ss.lower(x)
        if low - sent.get(x, 0) >= t:
            sent[x] = low
            self.ledger.up(Kind.ITEM_SIGNAL, j, 2)
            self.item_signal_count += 1
            row = self.cmxj.get(x)
            if row is None:
                row = self.cmxj[x] = [0] * self.k
            if low > row[j]:
                self.cmx[x] = self.cmx.get(x, 0) + low - row[j]
                row[j] = low
            self._consider(x)

    def _item_signal(self, j, x, t):
        self.ledger.up(Kind.ITEM_SIGNAL, j, 2)
        self.item_signal_count += 1
        self.cmx[x] = self.cmx.get(x, 0) + t
        self._consider(x)

    def _all_signal(self, j, t):
        self.ledger.up(Kind.ALL_SIGNAL, j, 1)
        self.all_signal_count += 1
        self.cm += t
        self.all_signals += 1
        if self.all_signals == self.k:
            self.all_signals = 0
            self.ledger.poll(1, 1)
            self.cm = sum(self.n_local)
            self.ledger.broadcast(Kind.BROADCAST_STATE, 1)
            self.rounds_completed += 1
            self._set_site_estimate(self.cm)

    # -- classification ----------------------------------------------------
    def classify(self, x):
        """Whether x is currently declared a phi-heavy hitter."""
        if self.cm <= 0:
            return False
        return 2 * self._cut_b * self.cmx.get(x, 0) >= self._cut_a * self.cm

    def _consider(self, x):
        if self.classify(x):
            self._cand.add(x)

    def _prune(self):
        drop = [x for x in self._cand if not self.classify(x)]
        for x in drop:
            self._cand.discard(x)

    def reported(self):
        """The declared heavy-hitter set (incrementally maintained)."""
        # C.m only grows and C.m_x only grows on its own signal, so an item
        # leaves by pruning and re-enters through _consider.
        self._prune()
        return set(self._cand)

    def report(self):
        """The declared set by a full scan of every item with a nonzero estimate."""
        return {x for x, c in self.cmx.items() if c and self.classify(x)}

    answer = reported

    # -- white-box view ----------------------------------------------------
    def threshold_probe(self, item):
        """Per site, copies of ``item`` it can absorb before it must speak."""
        t = self.thr
        if not self.started:
            return [1] * self.k
        out = []
        for j in range(self.k):
            rem_all = t - self.dm[j]
            if self.mode == "exact":
                rem_item = t - self.dmx[j].get(item, 0)
            else:
                rem_item = t  # conservative: the sketch's lower bound moves by at most 1
            out.append(min(rem_all, rem_item))
        return out

    # -- verification --------------------------------------------------------
    def check_output(self, oracle, seq, watch=None):
        cfg = self.cfg
        rep = self.reported()
        out = []
        n = oracle.total
        heavy = watch.current(oracle.counts, n) if watch is not None else \
            oracle.admissible_hh(cfg.phi_frac, cfg.eps_frac)[0]
        for x in heavy:
            if x not in rep:
                out.append(Violation(seq, "hh-missed", oracle.counts[x] / n - float(cfg.phi_frac)))
        # forbidden iff count < (phi - eps) * n, i.e. count * q < p * n
        p, q = self._forbid
        for x in rep:
            if oracle.counts[x] * q < p * n:
                out.append(Violation(seq, "hh-false", float(cfg.phi_frac - cfg.eps_frac)
                                     - oracle.counts[x] / n))
        return out

    def check_invariants(self, oracle, site, value, seq):
        m = oracle.total
        # estimate e is within the slack iff 0 <= truth - e and 3*b*(truth - e) <= a*m
        a, b = self._eps_ab
        out = []
        gap = m - self.cm
        if gap < 0 or 3 * b * gap > a * m:
            out.append(Violation(seq, "hh-Cm-bound", gap))
        mx = oracle.counts[value]
        gap_x = mx - self.cmx.get(value, 0)
        if gap_x < 0 or 3 * b * gap_x > a * m:
            out.append(Violation(seq, "hh-Cmx-bound", gap_x))
        if self.started:
            if 3 * b * (gap_x + self.k) > a * m:
                self.tight_bound_misses += 1
            if self.dm[site] >= self.thr:
                out.append(Violation(seq, "hh-quiescence", self.dm[site]))
            if self.mode == "exact" and self.dmx[site].get(value, 0) >= self.thr:
                out.append(Violation(seq, "hh-quiescence", self.dmx[site][value]))
        return out
