"""Behaviour shared by the three trackers: warm-up forwarding and reporting."""
from __future__ import annotations

from dataclasses import dataclass

from .core import CostLedger, Kind, TrackerConfig


@dataclass(frozen=True)
class Violation:
    seq: int
    kind: str
    magnitude: float = 0.0


class Tracker:
    """Coordinator plus k sites, driven one arrival at a time.

    ``receive`` runs the whole communication episode an arrival triggers, so
    the system is quiescent when it returns.  Until the warm-up length is
    reached every arrival is forwarded verbatim and the coordinator's view is
    exact; ``start`` then initialises the protocol from that exact state.
    """

    name = "tracker"
    warmup_factor = 1

    def __init__(self, config: TrackerConfig, mode="exact"):
        if mode not in ("exact", "sketch"):
            raise ValueError(f"unknown mode {mode!r}")
        self.cfg = config
        self.k = config.k
        self.mode = mode
        self.ledger = CostLedger(config.k)
        self.round = 0
        self.started = False
        self.n_seen = 0
        self.warmup_target = config.warmup_length(self.warmup_factor)

    def receive(self, site, value, seq):
        self.n_seen += 1
        if self.started:
            self._receive(site, value, seq)
            return
        self.ledger.up(Kind.WARMUP, site, 2)
        self._warm(site, value, seq)
        if self.n_seen >= self.warmup_target:
            self.started = True
            self.start()

    # subclass hooks
    def _warm(self, site, value, seq):
        raise NotImplementedError

    def start(self):
        raise NotImplementedError

    def _receive(self, site, value, seq):
        raise NotImplementedError

    def check_output(self, oracle, seq):
        return []

    def check_invariants(self, oracle, site, value, seq):
        return []

    def answer(self):
        raise NotImplementedError
