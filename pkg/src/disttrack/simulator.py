"""Single-threaded event loop for the coordinator-and-k-sites model.

An arrival is delivered to its site and every message it triggers is handled
before the next arrival, so the system is quiescent between events.  The
exact oracle sees the same arrivals, and at checkpoints the tracker's answer
is compared against it.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .allq import AllQuantilesTracker
from .core import ArrivalEvent, TrackerConfig, as_fraction, check_item
from .hh import HHTracker
from .oracle import ExactOracle
from .protocol import Violation
from .quantile import QuantileTracker

TRACKERS = {"hh": HHTracker, "quantile": QuantileTracker, "allq": AllQuantilesTracker}
DISTS = ("uniform", "zipf", "sorted", "permutation", "trace", "hh-adv", "median-adv")
PLACEMENTS = ("rr", "random", "whitebox")
DENSE_CHECK_LIMIT = 100_000
ALLQ_CHECK_EVERY = 1000


def parse_dist(spec):
    """'zipf:1.2' -> ('zipf', '1.2'); 'uniform' -> ('uniform', None)."""
    kind, _, arg = spec.partition(":")
    if kind not in DISTS:
        raise ValueError(f"unknown distribution {spec!r}")
    if kind == "zipf":
        if not arg:
            raise ValueError("zipf needs an exponent, e.g. zipf:1.2")
        if float(arg) <= 0:
            raise ValueError("zipf exponent must be positive")
    if kind == "trace" and not arg:
        raise ValueError("trace needs a path, e.g. trace:events.txt")
    if kind == "median-adv" and arg:
        raise ValueError("median-adv takes no argument")
    return kind, arg or None


class StreamSource:
    """Generates exactly n arrival events with seq = 0, 1, ..., n-1.

    ``eps`` only matters for the adversarial streams.  ``hh-adv:<phi>`` sets
    the construction's phi; the default 1/4 + eps gives groups of 2.  With
    ``placement="whitebox"`` (hh-adv only) sites are chosen during the run by
    a white-box adversary that inspects the tracker's trigger thresholds.
    """

    def __init__(self, dist, n, k, u=1 << 16, seed=0, placement="rr", eps=None):
        self.kind, self.arg = parse_dist(dist)
        if placement not in PLACEMENTS:
            raise ValueError(f"unknown placement {placement!r}")
        if placement == "whitebox" and self.kind != "hh-adv":
            raise ValueError("white-box placement needs the hh-adv stream")
        if n < 0:
            raise ValueError("n must be non-negative")
        self.dist = dist
        self.n = n
        self.k = k
        self.u = u
        self.seed = seed
        self.placement = placement
        self.eps = eps
        self.plan = None
        self.attack = None
        self._trace = None
        if self.kind == "trace":
            self._trace = read_trace(self.arg)
            self.n = min(n, len(self._trace)) if n else len(self._trace)
        elif self.kind == "hh-adv":
            from .adversary import HHLowerBoundPlan
            adv_phi = self.arg if self.arg else as_fraction(eps) + Fraction(1, 4)
            self.plan = HHLowerBoundPlan(adv_phi, eps, n)
            self.u = max(u, 2 * self.plan.l)
        elif self.kind == "median-adv":
            from .adversary import MedianLowerBoundPlan
            self.plan = MedianLowerBoundPlan(eps, n)
            self.u = max(u, 2)

    # -- items ---------------------------------------------------------------
    def items(self):
        n, u = self.n, self.u
        rng = np.random.default_rng(self.seed)
        if self.kind == "uniform":
            return rng.integers(1, u + 1, size=n).tolist()
        if self.kind == "zipf":
            s = float(self.arg)
            w = np.arange(1, u + 1, dtype=np.float64) ** -s
            p = w / w.sum()
            return (rng.choice(u, size=n, p=p) + 1).tolist()
        if self.kind == "sorted":
            return np.sort(rng.integers(1, u + 1, size=n)).tolist()
        if self.kind == "permutation":
            reps = max(1, math.ceil(n / u))
            out = np.concatenate([rng.permutation(u) + 1 for _ in range(reps)])
            return out[:n].tolist()
        if self.kind == "trace":
            return [ev.item for ev in self._trace[:n]]
        return self.plan.items()[:n]

    def events(self, tracker=None):
        """Yield the events lazily; white-box placement consults ``tracker``."""
        if self.kind == "trace":
            for ev in self._trace[:self.n]:
                check_item(ev.item, self.u)
                yield ev
            return
        items = self.items()
        k = self.k
        if self.placement == "rr":
            for i, x in enumerate(items):
                yield ArrivalEvent(i, i % k + 1, x)
        elif self.placement == "random":
            sites = np.random.default_rng([self.seed, 1]).integers(1, k + 1, size=len(items))
            for i, (x, j) in enumerate(zip(items, sites.tolist())):
                yield ArrivalEvent(i, j, x)
        else:
            from .adversary import WhiteboxAttack
            if tracker is None:
                raise ValueError("white-box placement needs the tracker")
            self.attack = WhiteboxAttack(self.plan, k, tracker)
            for i, x in enumerate(items):
                yield ArrivalEvent(i, self.attack.site(i, x) + 1, x)


def read_trace(path):
    events = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            seq, site, item = (int(t) for t in line.split())
            events.append(ArrivalEvent(seq, site, item))
    return events


def write_trace(path, events):
    with open(path, "w") as fh:
        for ev in events:
            fh.write(f"{ev.seq} {ev.site} {ev.item}\n")


@dataclass
class ViolationReport:
    violations: list = field(default_factory=list)
    checkpoints: int = 0

    @property
    def ok(self):
        return not self.violations

    def extend(self, vs):
        self.violations.extend(vs)

    def by_kind(self):
        return Counter(v.kind for v in self.violations)

    def __len__(self):
        return len(self.violations)


def default_checkpoint(tracker, n):
    if tracker == "allq":
        return ALLQ_CHECK_EVERY
    return 1 if n <= DENSE_CHECK_LIMIT else math.ceil(n / DENSE_CHECK_LIMIT)


class SimulationRun:
    """One tracker, one oracle, one ledger.

    ``checkpoint_every`` of None picks the default for the run length.
    ``invariants`` switches the per-event internal invariant checks.
    ``on_checkpoint(run, seq)`` is called after each checkpoint.
    """

    def __init__(self, config: TrackerConfig, tracker="hh", mode="exact",
                 checkpoint_every=None, invariants=True, on_checkpoint=None):
        if tracker not in TRACKERS:
            raise ValueError(f"unknown tracker {tracker!r}")
        self.config = config
        self.tracker_name = tracker
        self.tracker = TRACKERS[tracker](config, mode)
        self.oracle = ExactOracle(config.u)
        self.watch = None
        if tracker == "hh" or (tracker == "allq" and config.phi_frac >= config.eps_frac):
            self.watch = self.oracle.watch_heavy(config.phi_frac)
        self.checkpoint_every = checkpoint_every
        self.invariants = invariants
        self.on_checkpoint = on_checkpoint
        self.report = ViolationReport()
        self.last_seq = None
        self.steps = 0

    @property
    def ledger(self):
        return self.tracker.ledger

    def step(self, ev: ArrivalEvent):
        if self.last_seq is not None and ev.seq <= self.last_seq:
            raise ValueError(f"event seq {ev.seq} is not after {self.last_seq}")
        if not 1 <= ev.site <= self.config.k:
            raise ValueError(f"site {ev.site} outside 1..{self.config.k}")
        check_item(ev.item, self.config.u)
        self.last_seq = ev.seq
        self.steps += 1
        self.oracle.insert(ev.item, ev.seq)
        tr = self.tracker
        tr.receive(ev.site - 1, ev.item, ev.seq)
        if self.invariants:
            vs = tr.check_invariants(self.oracle, ev.site - 1, ev.item, ev.seq)
            if vs:
                self.report.extend(vs)
        every = self.checkpoint_every or 1
        if self.steps % every == 0:
            self.checkpoint(ev.seq)
        return self

    def checkpoint(self, seq):
        self.report.checkpoints += 1
        vs = self.tracker.check_output(self.oracle, seq, self.watch)
        if vs:
            self.report.extend(vs)
        if self.on_checkpoint is not None:
            self.on_checkpoint(self, seq)

    def run_to_completion(self, src: StreamSource):
        if self.steps:
            raise ValueError("run_to_completion needs a fresh run")
        if self.checkpoint_every is None:
            self.checkpoint_every = default_checkpoint(self.tracker_name, src.n)
        for ev in src.events(self.tracker):
            self.step(ev)
        return self.ledger, self.report


def simulate(tracker, k, eps, n, dist="uniform", phi=0.5, u=1 << 16, mode="exact",
             placement="rr", seed=0, checkpoint_every=None, invariants=True,
             on_checkpoint=None):
    """Build a config, a source and a run, and run it to completion."""
    src = StreamSource(dist, n, k, u=u, seed=seed, placement=placement, eps=eps)
    cfg = TrackerConfig(k=k, eps=eps, phi=phi, u=src.u)
    run = SimulationRun(cfg, tracker, mode, checkpoint_every, invariants, on_checkpoint)
    run.run_to_completion(src)
    run.source = src
    return run


__all__ = ["StreamSource", "SimulationRun", "ViolationReport", "Violation", "simulate",
           "read_trace", "write_trace", "parse_dist", "default_checkpoint", "TRACKERS"]
