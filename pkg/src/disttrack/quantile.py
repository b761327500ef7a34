"""Continuous phi-quantile tracking.

The run is split into rounds; a round starts whenever |A| has doubled since
the last one, and m denotes |A| at the round start.  Within a round the
coordinator keeps

* a set of separators cutting the key space into intervals that each hold
  between eps*m/8 and eps*m/2 items, with an underestimated count per
  interval; an interval whose count reaches 5*eps*m/16 is split in two;
* the tracked key M and underestimates of how many items arrived left and
  right of M since M last moved.  When the weighted drift
  |(1-phi)*dL - phi*dR| reaches eps*m/4, M is relocated: the exact rank of M
  is polled, then separators are probed outward until one lies within
  eps*m/4 of the target rank.

Keys are (value, seq) pairs, so ties between equal values are broken by
arrival order.  The two sentinel keys below and above every real key are
always separators, which lets M reach the extremes (phi = 0 or 1).
"""
from __future__ import annotations

import math
from bisect import bisect_right
from fractions import Fraction

from .core import Kind, high_key, low_key, threshold
from .keyindex import KeyIndex
from .localdata import ExactLocal, SketchLocal, merge_samples, nearest, sample_words
from .protocol import Tracker, Violation


def rank_distance(r, target):
    """Distance from target to [r, r + 1], the ranks a key with r smaller
    items occupies as a phi'-quantile."""
    return max(0.0, r - target, target - r - 1)


def rank_offset(phi, left, total):
    """Signed distance from M's rank to the target rank: positive means M has
    to move right.  For phi = 1/2 this is (C.R - C.L)/2."""
    return float(phi * total) - left


class ProtocolError(RuntimeError):
    """An internal protocol invariant failed (indicates a maintenance bug)."""


# Site samples are taken at eps*|A_j|/64 spacing at round start and at 1/64 of
# the local interval content for splits.
ROUND_SAMPLE_DIVISOR = 64
SPLIT_SAMPLE_DIVISOR = 64


class QuantileTracker(Tracker):
    name = "quantile"

    def __init__(self, config, mode="exact"):
        super().__init__(config, mode)
        eps = config.eps_frac
        self.eps_protocol = eps if mode == "exact" else eps * Fraction(3, 4)
        self.sketch_eps = float(eps) / 32
        self.phi = config.phi_frac
        self._phi_pq = (self.phi.numerator, self.phi.denominator)
        self._phi_f = float(self.phi)
        self.warmup_target = max(self.warmup_target,
                                 math.ceil(64 / eps)) if config.warmup else 0
        self.low = low_key()
        self.high = high_key(config.u)
        k = self.k
        if mode == "exact":
            self.local = [ExactLocal(config.u) for _ in range(k)]
        else:
            self.local = [SketchLocal(self.sketch_eps) for _ in range(k)]
        self.n_local = [0] * k
        self.forwarded = KeyIndex(config.u)  # coordinator's copy during warm-up

        self.m = 0
        self.bounds = [self.low, self.high]
        self.counts = [0]
        self.count_sum = 0
        self.pend_int = [[0] for _ in range(k)]
        self.M = self.low
        self.dL = 0
        self.dR = 0
        self.pend_side = [[0, 0] for _ in range(k)]
        self.tau_drift = 1
        self.tau_int = 1
        self.split_at = Fraction(0)
        self.drift_trigger = Fraction(0)

        # instrumentation (never consulted by the protocol)
        self.history = []  # per finished round: dict of counters
        self.relocations = 0
        self.splits = 0
        self.probes = 0
        self.relocation_errors = []
        self.true_L = 0
        self.true_R = 0
        self.reloc_offset = 0.0
        self._recheck = None  # interval start keys to verify; None means all

    # -- warm-up -------------------------------------------------------------
    def _warm(self, site, value, seq):
        self.local[site].insert((value, seq))
        self.n_local[site] += 1
        self.forwarded.insert(value, seq)

    def start(self):
        self.new_round()

    # -- arrivals ------------------------------------------------------------
    def _receive(self, j, value, seq):
        key = (value, seq)
        self.local[j].insert(key)
        self.n_local[j] += 1

        i = bisect_right(self.bounds, key) - 1
        pend = self.pend_int[j]
        p = pend[i] + 1
        if p >= self.tau_int:
            pend[i] = 0
            self.ledger.up(Kind.INTERVAL_UPDATE, j, 2)
            self.counts[i] += self.tau_int
            self.count_sum += self.tau_int
            if self.counts[i] >= self.split_at:
                self.split(i)
            if self.count_sum >= 2 * self.m:
                self.new_round()
                return
        else:
            pend[i] = p

        side = 0 if key < self.M else 1
        if side == 0:
            self.true_L += 1
        else:
            self.true_R += 1
        ps = self.pend_side[j]
        q = ps[side] + 1
        if q < self.tau_drift:
            ps[side] = q
            return
        ps[side] = 0
        self.ledger.up(Kind.DRIFT_UPDATE, j, 2)
        if side == 0:
            self.dL += self.tau_drift
        else:
            self.dR += self.tau_drift
        if self.drift_exceeded():
            self.relocate()

    def drift_exceeded(self):
        """Whether |(1-phi)*dL - phi*dR| has reached the relocation trigger."""
        p, q = self._phi_pq
        return abs((q - p) * self.dL - p * self.dR) >= self._trigger_q

    # -- relocation ------------------------------------------------------------
    def relocate(self):
        """Move M to a separator within eps*m/4 of the target rank."""
        self.relocations += 1
        led = self.ledger
        led.poll(1, 2)
        r_m = sum(loc.rank(self.M) for loc in self.local)
        total = sum(self.n_local)
        d = rank_offset(self.phi, r_m, total)
        tol = float(self.eps_protocol * self.m / 4)
        idx = self.bounds.index(self.M)
        new_idx = idx
        if abs(d) > tol:
            step = 1 if d > 0 else -1
            want = abs(d)
            best = None
            c = idx + step
            while 0 <= c < len(self.bounds):
                y = self.bounds[c]
                self.probes += 1
                led.poll(2, 1, Kind.PROBE_REQUEST, Kind.PROBE_REPLY)
                if step > 0:
                    n_i = sum(loc.count_range(self.M, y) for loc in self.local)
                else:
                    n_i = sum(loc.count_range(y, self.M) for loc in self.local)
                if best is None or abs(n_i - want) < best[0]:
                    best = (abs(n_i - want), c)
                if abs(n_i - want) <= tol:
                    new_idx = c
                    break
                if n_i > want + tol:
                    if self.mode == "exact":
                        raise ProtocolError(
                            f"no separator within {tol:.1f} of rank offset {want:.1f}")
                    new_idx = best[1]
                    break
                c += step
            else:
                if self.mode == "exact":
                    raise ProtocolError("separator probes ran off the key space")
                new_idx = best[1]
        self.M = self.bounds[new_idx]
        r_new = sum(loc.rank(self.M) for loc in self.local)
        self.reloc_offset = r_new - float(self.phi * total)
        self.relocation_errors.append(abs(self.reloc_offset) / max(1, self.m))
        self._reset_drift()
        led.broadcast(Kind.BROADCAST_STATE, 2)

    def _reset_drift(self):
        self.dL = self.dR = 0
        self.true_L = self.true_R = 0
        for ps in self.pend_side:
            ps[0] = ps[1] = 0

    # -- interval maintenance ------------------------------------------------
    def split(self, i):
        """Cut interval i near its median using fine per-site samples."""
        lo, hi = self.bounds[i], self.bounds[i + 1]
        led = self.ledger
        k = self.k
        led.poll(2, 1)  # local counts of the interval
        local_counts = [loc.count_range(lo, hi) for loc in self.local]
        led.add(Kind.POLL_REQUEST, k, k)
        samples = [loc.sample(lo, hi, max(1, int(c // SPLIT_SAMPLE_DIVISOR)))
                   for loc, c in zip(self.local, local_counts)]
        led.add(Kind.SUMMARY, k, sum(sample_words(s) for s in samples))
        for j in range(k):
            led.site_sent[j] += 1
        keys, ests, total = merge_samples(samples)
        start = bisect_right(keys, lo)
        c = nearest(ests, total / 2, start)
        if c is None:
            return
        y = keys[c]
        led.broadcast(Kind.BROADCAST_STATE, 2)
        led.add(Kind.POLL_REPLY, k, 2 * k)
        for j in range(k):
            led.site_sent[j] += 1
        left = sum(loc.count_range(lo, y) for loc in self.local)
        right = sum(loc.count_range(y, hi) for loc in self.local)
        self.count_sum += left + right - self.counts[i]
        self.counts[i] = left
        self.counts.insert(i + 1, right)
        self.bounds.insert(i + 1, y)
        for pend in self.pend_int:
            pend[i] = 0
            pend.insert(i + 1, 0)
        self.splits += 1
        if self._recheck is not None:
            self._recheck += [lo, y]

    def new_round(self):
        """Rebuild the intervals from per-site samples and re-choose M."""
        led = self.ledger
        k = self.k
        if self.started and self.round > 0:
            self._close_round()
        led.broadcast(Kind.POLL_REQUEST, 1)
        eps = self.eps_protocol
        samples = [loc.sample(self.low, self.high,
                              max(1, int(eps * n / ROUND_SAMPLE_DIVISOR)))
                   for loc, n in zip(self.local, self.n_local)]
        led.add(Kind.SUMMARY, k, sum(sample_words(s) for s in samples))
        for j in range(k):
            led.site_sent[j] += 1
        m = sum(self.n_local)
        self.m = m
        keys, ests, total = merge_samples(samples)

        target = float(3 * eps * m / 16)
        q = max(1, round(total / target)) if target > 0 else 1
        chosen = []
        start = 0
        for t in range(1, q):
            c = nearest(ests, t * total / q, start)
            if c is None:
                break
            chosen.append(keys[c])
            start = c + 1
        self.bounds = [self.low] + chosen + [self.high]
        led.broadcast(Kind.BROADCAST_STATE, 2 * len(chosen) + 1)

        n_int = len(self.bounds) - 1
        led.add(Kind.POLL_REPLY, k, k * n_int)
        for j in range(k):
            led.site_sent[j] += 1
        counts = [0] * n_int
        for loc in self.local:
            ranks = [loc.rank(b) for b in self.bounds]
            for i in range(n_int):
                counts[i] += ranks[i + 1] - ranks[i]
        self.counts = counts
        self.count_sum = sum(counts)
        self.pend_int = [[0] * n_int for _ in range(k)]

        goal = self._phi_f * self.count_sum
        best, best_rank, acc = 0, 0, 0
        for i in range(n_int + 1):
            if abs(acc - goal) < abs(best_rank - goal):
                best, best_rank = i, acc
            if i < n_int:
                acc += counts[i]
        self.M = self.bounds[best]
        self.reloc_offset = best_rank - goal
        led.broadcast(Kind.BROADCAST_STATE, 2)
        self._reset_drift()

        self.tau_drift = threshold(eps * m / (8 * k))
        self.tau_int = threshold(eps * m / (8 * k))
        self.split_at = 5 * eps * m / 16
        self.drift_trigger = eps * m / 4
        # |(1-phi)*dL - phi*dR| >= trigger  <=>  |(q-p)*dL - p*dR| >= ceil(q*trigger)
        self._trigger_q = max(1, -(-self.drift_trigger * self._phi_pq[1] // 1))
        self.round += 1
        led.snapshot_round(self.round)
        self._recheck = None

    def _close_round(self):
        self.history.append({"m": self.m, "relocations": self.relocations,
                             "splits": self.splits, "probes": self.probes,
                             "intervals": len(self.counts)})
        self.relocations = self.splits = self.probes = 0

    # -- queries ---------------------------------------------------------------
    @property
    def tracked_key(self):
        if not self.started:
            # every item so far was forwarded, so answer exactly
            n = len(self.forwarded)
            if n == 0:
                return self.low
            return self.forwarded.select(min(n - 1, int(self.phi * n)))
        return self.M

    def query(self):
        """The tracked approximate phi-quantile (an item of the universe)."""
        return self.tracked_key[0]

    answer = query

    # -- verification ----------------------------------------------------------
    def check_output(self, oracle, seq, watch=None):
        n = oracle.total
        r = oracle.rank(self.tracked_key)
        err = rank_distance(r, self._phi_f * n)
        if err > float(self.cfg.eps_frac) * n:
            return [Violation(seq, "quantile-rank", err / n)]
        return []

    def check_invariants(self, oracle, site, value, seq):
        if self.mode != "exact" or not self.started:
            return []
        eps = float(self.eps_protocol)
        m = self.m
        out = []
        lo_band, hi_band = eps * m / 8, eps * m / 2
        slack = eps * m / 8
        bounds = self.bounds
        if self._recheck is None:
            idxs = range(len(self.counts))
        else:
            idxs = {bisect_right(bounds, key) - 1 for key in self._recheck}
            idxs.add(bisect_right(bounds, (value, seq)) - 1)
        self._recheck = []
        for i in idxs:
            true = oracle.count_range(self.bounds[i], self.bounds[i + 1])
            if not lo_band <= true <= hi_band:
                out.append(Violation(seq, "interval-size", true / max(1, eps * m)))
            c = self.counts[i]
            if not (c <= true and true - c < slack + 1e-9):
                out.append(Violation(seq, "interval-count", true - c))
        if not (self.dL <= self.true_L and self.true_L - self.dL < slack + 1e-9):
            out.append(Violation(seq, "drift-L", self.true_L - self.dL))
        if not (self.dR <= self.true_R and self.true_R - self.dR < slack + 1e-9):
            out.append(Violation(seq, "drift-R", self.true_R - self.dR))
        ps = self.pend_side[site]
        if ps[0] >= self.tau_drift or ps[1] >= self.tau_drift:
            out.append(Violation(seq, "quantile-quiescence", max(ps)))
        n = oracle.total
        drift = (oracle.rank(self.M) - self._phi_f * n) - self.reloc_offset
        if abs(self.reloc_offset) > eps * m / 4 + 1e-9:
            out.append(Violation(seq, "relocation-error", self.reloc_offset / m))
        if abs(drift) > 3 * eps * m / 4 + 1e-9:
            out.append(Violation(seq, "drift-error", drift / m))
        return out
