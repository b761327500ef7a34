"""Shared types: items and keys, messages, the cost ledger, tracker configuration."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

# Items are compared by (value, arrival seq) so that all keys are distinct.
# Sentinel keys bracket every real key of the universe: nothing is below
# (1, LOW_SEQ) and everything is below (u, HIGH_SEQ).
LOW_SEQ = -1
HIGH_SEQ = 1 << 62


def low_key(value=1):
    return (value, LOW_SEQ)


def high_key(u):
    return (u, HIGH_SEQ)


class ArrivalEvent(NamedTuple):
    seq: int
    site: int  # 1..k
    item: int  # 1..u


def check_item(value, u):
    if not 1 <= value <= u:
        raise ValueError(f"item {value} outside universe 1..{u}")
    return value


class Direction(enum.Enum):
    UP = "site->coordinator"
    DOWN = "coordinator->site"
    BROADCAST = "broadcast"


class Kind(str, enum.Enum):
    ALL_SIGNAL = "all-signal"
    ITEM_SIGNAL = "item-signal"
    INTERVAL_UPDATE = "interval-update"
    DRIFT_UPDATE = "drift-update"
    NODE_UPDATE = "node-update"
    POLL_REQUEST = "poll-request"
    POLL_REPLY = "poll-reply"
    BROADCAST_STATE = "broadcast-state"
    PROBE_REQUEST = "probe-request"
    PROBE_REPLY = "probe-reply"
    SUMMARY = "summary"
    WARMUP = "warmup-forward"


@dataclass(frozen=True)
class Message:
    direction: Direction
    kind: Kind
    words: int = 1
    site: int | None = None  # sender for UP messages, 0-based

    def __post_init__(self):
        if self.words < 1:
            raise ValueError("a message carries at least one word")


class LedgerError(ValueError):
    pass


class CostLedger:
    """Message and word counts per kind, per sending site, and per round.

    A broadcast is charged as k directed messages.  Round snapshots store the
    cumulative totals so per-round deltas can be recovered.
    """

    def __init__(self, k):
        self.k = k
        self.messages = 0
        self.words = 0
        self.by_kind: dict[Kind, list[int]] = {}
        self.site_sent = [0] * k  # every message a site sent, replies included
        self.site_signals = [0] * k  # messages a site initiated on its own
        self.rounds: list[tuple[int, int, int]] = []

    def record(self, msg: Message) -> CostLedger:
        copies = self.k if msg.direction is Direction.BROADCAST else 1
        self.add(msg.kind, copies, copies * msg.words, msg.site)
        return self

    def add(self, kind, messages, words, site=None):
        """Fast path used by the trackers: ``messages`` messages totalling ``words``."""
        self.messages += messages
        self.words += words
        slot = self.by_kind.get(kind)
        if slot is None:
            self.by_kind[kind] = [messages, words]
        else:
            slot[0] += messages
            slot[1] += words
        if site is not None:
            self.site_sent[site] += messages
            self.site_signals[site] += messages

    # Shorthands for the accounting conventions every protocol shares.
    def up(self, kind, site, words=1):
        self.add(kind, 1, words, site)

    def broadcast(self, kind, words=1):
        self.add(kind, self.k, self.k * words)

    def poll(self, request_words=1, reply_words=1, request_kind=Kind.POLL_REQUEST,
             reply_kind=Kind.POLL_REPLY):
        """Coordinator asks every site and every site answers."""
        k = self.k
        self.add(request_kind, k, k * request_words)
        self.messages += k
        self.words += k * reply_words
        slot = self.by_kind.setdefault(reply_kind, [0, 0])
        slot[0] += k
        slot[1] += k * reply_words
        for j in range(k):
            self.site_sent[j] += 1

    def snapshot_round(self, round_id) -> CostLedger:
        if self.rounds and round_id <= self.rounds[-1][0]:
            raise LedgerError(f"round {round_id} not after {self.rounds[-1][0]}")
        self.rounds.append((round_id, self.messages, self.words))
        return self

    def round_deltas(self, include_open=False):
        """Messages sent between consecutive snapshots."""
        out = []
        prev = 0
        for _, msgs, _w in self.rounds:
            out.append(msgs - prev)
            prev = msgs
        if include_open:
            out.append(self.messages - prev)
        return out

    def count(self, kind):
        return self.by_kind.get(kind, (0, 0))[0]

    def totals(self):
        return {"messages": self.messages, "words": self.words}

    def fingerprint(self):
        kinds = sorted((k.value, tuple(v)) for k, v in self.by_kind.items())
        return (self.messages, self.words, tuple(kinds), tuple(self.site_sent),
                tuple(self.rounds))


def as_fraction(x) -> Fraction:
    """Exact rational view of a user-supplied float ('0.1' stays 1/10)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


def ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def threshold(x: Fraction) -> int:
    """Integer trigger threshold max(1, ceil(x))."""
    return max(1, ceil_frac(x))


@dataclass
class TrackerConfig:
    k: int
    eps: float
    phi: float = 0.5
    u: int = 1 << 16
    warmup: bool = True
    eps_frac: Fraction = field(init=False, repr=False)
    phi_frac: Fraction = field(init=False, repr=False)

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("need k >= 2 sites")
        self.eps_frac = as_fraction(self.eps)
        self.phi_frac = as_fraction(self.phi)
        if not 0 < self.eps_frac < 1:
            raise ValueError("eps must lie in (0, 1)")
        if not 0 <= self.phi_frac <= 1:
            raise ValueError("phi must lie in [0, 1]")
        if self.u < 1:
            raise ValueError("universe size must be positive")

    def require_hh(self):
        if self.phi_frac < self.eps_frac:
            raise ValueError(f"heavy hitters need phi >= eps (phi={self.phi}, eps={self.eps})")

    def warmup_length(self, factor=1):
        if not self.warmup:
            return 0
        return ceil_frac(factor * self.k / self.eps_frac)

    def with_eps(self, eps):
        return TrackerConfig(self.k, eps, self.phi, self.u, self.warmup)


def log2(x):
    return math.log2(x) if x > 1 else 0.0
