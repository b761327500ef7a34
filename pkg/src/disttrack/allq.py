"""Continuous tracking of all quantiles with a binary tree over keys.

Every node covers a key interval [lo, hi) and keeps an underestimate s of
how many items fall inside it.  Internal nodes cut their interval at a
splitter chosen near the interval's median.  Each site counts, per node on
an arrival's root-to-leaf path, the arrivals since its last report for that
node and reports when the count reaches theta*m/k, so every s lags the truth
by less than theta*m.  With h = ceil(log_{8/5}(2/eps)) and theta = eps/(2h)
a rank query, which sums the s of the left siblings along a path, is off by
less than eps*m.

The tree stays balanced (s_u/4 <= s_v <= 3*s_u/4 for every child v of u) by
rebuilding the subtree of the highest node that breaks the condition, and a
leaf whose s exceeds (eps/2 - 2*theta)*m is split.  A new round, with a full
rebuild, starts when the root count has doubled.
"""
from __future__ import annotations

import math
import random
from fractions import Fraction

from .core import Kind, high_key, low_key, threshold
from .keyindex import KeyIndex
from .localdata import ExactLocal, SketchLocal, merge_samples, nearest, sample_words
from .protocol import Tracker, Violation
from .quantile import rank_distance

MIN_HEIGHT = 6
BUILD_SAMPLE_DIVISOR = 64
LEAF_CAP = Fraction(5, 16)  # build stops splitting at 5*eps*m/16


def height_bound(eps):
    return math.ceil(math.log(2 / float(eps)) / math.log(8 / 5))


def unbalanced(s_u, s_v):
    """Whether child count s_v breaks s_u/4 <= s_v <= 3*s_u/4 (bounds inclusive)."""
    return 4 * s_v < s_u or 4 * s_v > 3 * s_u


class Node:
    __slots__ = ("lo", "hi", "split", "left", "right", "s", "pend", "depth", "parent",
                 "built")

    def __init__(self, lo, hi, depth, parent, k):
        self.lo = lo
        self.hi = hi
        self.split = None
        self.left = None
        self.right = None
        self.s = 0
        self.pend = [0] * k
        self.depth = depth
        self.parent = parent
        self.built = 0  # s when the node's subtree was last built

    @property
    def is_leaf(self):
        return self.left is None

    def __repr__(self):
        return f"Node({self.lo}, {self.hi}, s={self.s}, depth={self.depth})"


class AllQuantilesTracker(Tracker):
    name = "allq"

    def __init__(self, config, mode="exact"):
        super().__init__(config, mode)
        eps = config.eps_frac
        self.eps_protocol = eps if mode == "exact" else eps * Fraction(3, 4)
        self.h = height_bound(self.eps_protocol)
        if self.h < MIN_HEIGHT:
            raise ValueError(f"eps={config.eps} gives tree height bound {self.h}; "
                             f"need at least {MIN_HEIGHT} (eps below about 0.18)")
        self.theta = self.eps_protocol / (2 * self.h)
        self.sketch_eps = float(self.theta) / 8
        self.phi = config.phi_frac
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
        self.root = Node(self.low, self.high, 0, None, k)
        self.tau = 1
        self.split_at = 0.0
        self.cap = 0.0

        # instrumentation (never consulted by the protocol)
        self.history = []
        self.rebuilds = 0
        self.leaf_splits = 0
        self.escalations = 0
        self.updates = 0
        self.build_ratios = []  # (min, max) child/parent exact share per build
        self.growth = []  # s of a violating node over its s when it was built
        self._rebuilt = None  # subtree roots rebuilt since the last check; None means all

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
        tau = self.tau
        node = self.root
        touched = False
        while True:
            p = node.pend[j] + 1
            if p >= tau:
                node.pend[j] = 0
                node.s += tau
                self.ledger.up(Kind.NODE_UPDATE, j, 2)
                self.updates += 1
                touched = True
            else:
                node.pend[j] = p
            if node.left is None:
                break
            node = node.left if key < node.split else node.right
        if not touched:
            return
        if self.root.s >= 2 * self.m:
            self.new_round()
            return
        self._settle(key)

    def _settle(self, key):
        """Restore balance and leaf sizes along key's path."""
        while True:
            bad = self._highest_violation(key)
            if bad is not None:
                self._rebuild(bad, balance=True)
                continue
            leaf = self.leaf_for(key)
            if leaf.s > self.split_at:
                self._split_leaf(leaf)
                continue
            return

    def _highest_violation(self, key):
        node = self.root
        while node.left is not None:
            su = node.s
            if unbalanced(su, node.left.s) or unbalanced(su, node.right.s):
                return node
            node = node.left if key < node.split else node.right
        return None

    def leaf_for(self, key):
        node = self.root
        while node.left is not None:
            node = node.left if key < node.split else node.right
        return node

    # -- structural episodes -------------------------------------------------
    def _split_leaf(self, leaf):
        self.leaf_splits += 1
        self._rebuild(leaf, balance=False)

    def _rebuild(self, node, balance):
        """Rebuild node's subtree from fresh site samples.

        If the new subtree would push leaves below depth h, the rebuild moves
        up to the lowest ancestor whose rebuilt subtree fits.
        """
        if balance and node.built:
            self.growth.append(node.s / node.built)
        target = node
        # The coordinator first picks the target from its own counts, assuming
        # near-even splits; a sampled plan that is still too deep moves it up.
        while target.parent is not None and \
                target.depth + self._predicted_height(target) > self.h:
            target = target.parent
            self.escalations += 1
        while True:
            keys, ests, total = self._collect(target.lo, target.hi)
            plan, height = self._plan(keys, ests, 0, len(keys), 0.0, float(total))
            if target.depth + height <= self.h or target.parent is None:
                break
            target = target.parent
            self.escalations += 1
        self._commit(target, plan)
        self.rebuilds += 1

    def _predicted_height(self, node):
        c = node.s + self.k * self.tau
        t = 0
        while c > self.cap:
            c *= 0.55
            t += 1
        return t

    def _collect(self, lo, hi):
        """Poll local counts of [lo, hi), then fetch samples sized to them."""
        led = self.ledger
        k = self.k
        led.poll(2, 1)
        local_counts = [loc.count_range(lo, hi) for loc in self.local]
        S = sum(local_counts)
        unit = float(self.eps_protocol) * self.m / BUILD_SAMPLE_DIVISOR
        samples = []
        for loc, c in zip(self.local, local_counts):
            spacing = max(1, int(unit * c / S)) if S > 0 else 1
            samples.append(loc.sample(lo, hi, spacing))
        led.add(Kind.POLL_REQUEST, k, k)
        led.add(Kind.SUMMARY, k, sum(sample_words(s) for s in samples))
        for j in range(k):
            led.site_sent[j] += 1
        return merge_samples(samples)

    def _plan(self, keys, ests, a, b, r_lo, r_hi):
        """Nested (splitter, left, right) plan over candidates keys[a:b]."""
        if r_hi - r_lo <= self.cap or a >= b:
            return None, 0
        c = nearest(ests, (r_lo + r_hi) / 2, a, b)
        left, hl = self._plan(keys, ests, a, c, r_lo, ests[c])
        right, hr = self._plan(keys, ests, c + 1, b, ests[c], r_hi)
        return (keys[c], left, right), 1 + max(hl, hr)

    def _commit(self, node, plan):
        """Install plan below node, broadcast it, and collect exact counts."""
        led = self.ledger
        k = self.k
        node.left = node.right = node.split = None
        leaves = []
        internal = []

        def grow(n, p):
            if p is None:
                leaves.append(n)
                return
            internal.append(n)
            n.split = p[0]
            n.left = Node(n.lo, p[0], n.depth + 1, n, k)
            n.right = Node(p[0], n.hi, n.depth + 1, n, k)
            grow(n.left, p[1])
            grow(n.right, p[2])

        grow(node, plan)
        led.broadcast(Kind.BROADCAST_STATE, 2 * len(internal) + 2)
        led.add(Kind.POLL_REPLY, k, k * len(leaves))
        for j in range(k):
            led.site_sent[j] += 1
        bounds = [leaves[0].lo] + [leaf.hi for leaf in leaves]
        counts = [0] * len(leaves)
        for loc in self.local:
            ranks = [loc.rank(b) for b in bounds]
            for i in range(len(leaves)):
                counts[i] += ranks[i + 1] - ranks[i]
        for leaf, c in zip(leaves, counts):
            leaf.s = c
        for n in reversed(internal):
            n.s = n.left.s + n.right.s
        for n in internal + leaves:
            n.pend = [0] * k
            n.built = n.s
        if internal:
            shares = [v.s / n.s for n in internal for v in (n.left, n.right) if n.s]
            if shares:
                self.build_ratios.append((min(shares), max(shares)))
        if self._rebuilt is not None:
            self._rebuilt.append(node)

    def new_round(self):
        if self.round > 0:
            self._close_round()
        self.ledger.poll(1, 1)
        m = sum(self.n_local)
        self.m = m
        eps = self.eps_protocol
        self.tau = threshold(self.theta * m / self.k)
        self.split_at = float((eps / 2 - 2 * self.theta) * m)
        self.cap = float(LEAF_CAP * eps * m)
        self.root.pend = [0] * self.k
        keys, ests, total = self._collect(self.root.lo, self.root.hi)
        plan, _ = self._plan(keys, ests, 0, len(keys), 0.0, float(total))
        self._commit(self.root, plan)
        self._rebuilt = None
        self.round += 1
        self.ledger.snapshot_round(self.round)

    def _close_round(self):
        self.history.append({"m": self.m, "rebuilds": self.rebuilds,
                             "leaf_splits": self.leaf_splits,
                             "escalations": self.escalations,
                             "updates": self.updates, "nodes": self.node_count()})
        self.rebuilds = self.leaf_splits = self.escalations = self.updates = 0

    # -- queries ---------------------------------------------------------------
    # Until the protocol starts every item has been forwarded, so the
    # queries below answer exactly from the coordinator's copy.
    def size_estimate(self):
        return self.root.s if self.started else len(self.forwarded)

    def rank_key(self, key):
        """Sum of the left siblings' s along key's root-to-leaf path."""
        if not self.started:
            return self.forwarded.rank(key)
        node = self.root
        r = 0
        while node.left is not None:
            if key < node.split:
                node = node.left
            else:
                r += node.left.s
                node = node.right
        return r

    def t_rank(self, value):
        """Estimated number of items smaller than value."""
        if not 1 <= value <= self.cfg.u + 1:
            raise ValueError(f"item {value} outside universe 1..{self.cfg.u}")
        return self.rank_key(low_key(value))

    def quantile_key(self, phi):
        if not self.started:
            n = len(self.forwarded)
            return self.forwarded.select(min(n - 1, int(phi * n))) if n else self.low
        r = float(phi) * self.root.s
        node = self.root
        while node.left is not None:
            if r < node.left.s:
                node = node.left
            else:
                r -= node.left.s
                node = node.right
        return node.lo

    def t_quantile(self, phi):
        """An approximate phi-quantile: the left boundary of the target leaf."""
        if not 0 <= phi <= 1:
            raise ValueError("phi must lie in [0, 1]")
        return self.quantile_key(phi)[0]

    def answer(self):
        return self.t_quantile(self.phi)

    def derived_heavy_hitters(self, phi=None):
        """Items whose estimated frequency reaches (phi - eps) times the size."""
        phi = self.phi if phi is None else phi
        if not self.started:
            fw = self.forwarded
            return {x for x in fw.values() if fw.count_value(x) >= phi * len(fw)}
        cut = float(phi - self.eps_protocol) * self.root.s
        out = set()
        for v in {n.split[0] for n in self.nodes() if n.split is not None}:
            f = self.rank_key(low_key(v + 1)) - self.rank_key(low_key(v))
            if f >= cut:
                out.add(v)
        return out

    # -- structure views -------------------------------------------------------
    def nodes(self, top=None):
        stack = [self.root if top is None else top]
        while stack:
            n = stack.pop()
            yield n
            if n.left is not None:
                stack.append(n.right)
                stack.append(n.left)

    def node_count(self):
        return sum(1 for _ in self.nodes())

    def depth(self, top=None):
        return max(n.depth for n in self.nodes(top))

    def _attached(self, node):
        while node.parent is not None:
            p = node.parent
            if p.left is not node and p.right is not node:
                return False
            node = p
        return node is self.root

    def dump(self):
        """Preorder lines: depth interval_lo interval_hi splitter s."""
        def fmt(key):
            return f"{key[0]}:{key[1]}"
        lines = []
        for n in self.nodes():
            sp = fmt(n.split) if n.split is not None else "-"
            lines.append(f"{n.depth} {fmt(n.lo)} {fmt(n.hi)} {sp} {n.s}")
        return "\n".join(lines)

    # -- verification ----------------------------------------------------------
    def check_output(self, oracle, seq, watch=None):
        n = oracle.total
        if n == 0:
            return []
        eps = float(self.cfg.eps_frac)
        tol = eps * n
        out = []
        for i in range(1, 100):
            phi = i / 100
            err = rank_distance(oracle.rank(self.quantile_key(phi)), phi * n)
            if err > tol:
                out.append(Violation(seq, "allq-quantile", err / n))
        rng = random.Random(seq)
        u = self.cfg.u
        for _ in range(200):
            x = rng.randint(1, u)
            err = abs(self.t_rank(x) - oracle.less_than(x))
            if err > tol:
                out.append(Violation(seq, "allq-rank", err / n))
        if self.phi >= self.cfg.eps_frac:
            rep = self.derived_heavy_hitters()
            need = watch.current(oracle.counts, n) if watch is not None else \
                oracle.admissible_hh(self.phi, self.cfg.eps_frac)[0]
            for x in need:
                if x not in rep:
                    out.append(Violation(seq, "allq-hh-missed", oracle.counts[x] / n))
            floor = float(self.phi) - 2 * eps
            for x in rep:
                if oracle.counts[x] < floor * n:
                    out.append(Violation(seq, "allq-hh-false", oracle.counts[x] / n))
        return out

    def check_invariants(self, oracle, site, value, seq):
        if self.mode != "exact" or not self.started:
            return []
        out = []
        if self._rebuilt is None:
            tops = [self.root]
        else:
            tops = [t for t in self._rebuilt if self._attached(t)]
        self._rebuilt = []
        seen = set()
        nodes = []
        for t in tops:
            for n in self.nodes(t):
                if id(n) not in seen:
                    seen.add(id(n))
                    nodes.append(n)
            if self.depth(t) > self.h:
                out.append(Violation(seq, "allq-depth", self.depth(t)))
        for n in self._path((value, seq)):
            if id(n) not in seen:
                nodes.append(n)
        slack = float(self.theta) * self.m
        leaf_cap = float(self.eps_protocol) * self.m / 2
        for n in nodes:
            true = oracle.count_range(n.lo, n.hi)
            if not (n.s <= true and true - n.s < slack):
                out.append(Violation(seq, "allq-slack", true - n.s))
            if n.left is None:
                if true > leaf_cap:
                    out.append(Violation(seq, "allq-leaf-size", true / max(1, self.m)))
            else:
                for v in (n.left, n.right):
                    if unbalanced(n.s, v.s):
                        out.append(Violation(seq, "allq-balance", v.s / max(1, n.s)))
        pend = max(n.pend[site] for n in nodes)
        if pend >= self.tau:
            out.append(Violation(seq, "allq-quiescence", pend))
        return out

    def _path(self, key):
        node = self.root
        out = [node]
        while node.left is not None:
            node = node.left if key < node.split else node.right
            out.append(node)
        return out

