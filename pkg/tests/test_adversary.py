import math
from collections import Counter
from fractions import Fraction

import pytest

from disttrack.adversary import (HHChangeCounter, HHLowerBoundPlan, MedianChangeCounter,
                                 MedianLowerBoundPlan, WhiteboxAttack, gen_hh_lb_stream,
                                 gen_median_lb_stream, whitebox_attack)
from disttrack.core import CostLedger, TrackerConfig, ceil_frac
from disttrack.hh import HHTracker
from disttrack.simulator import simulate


def test_hh_plan_formulas():
    p = HHLowerBoundPlan(0.3, 0.05, 10_000)
    assert p.eps2 == Fraction(1, 10)
    assert p.l == 2
    assert p.beta == Fraction(1, 4)
    assert p.growth == Fraction(3, 2)
    assert p.group(0) == [1, 2] and p.group(1) == [3, 4]


def test_hh_plan_rejects_non_integer_l():
    with pytest.raises(ValueError, match="admissible"):
        HHLowerBoundPlan(0.35, 0.05, 1000)
    with pytest.raises(ValueError):
        HHLowerBoundPlan(0.3, 0.1, 1000)  # phi <= 3*eps
    with pytest.raises(ValueError):
        HHLowerBoundPlan(0.05, 0.1, 1000)


def test_hh_round_invariants_by_oracle():
    p = HHLowerBoundPlan(0.3, 0.05, 200_000)
    items = p.items()
    starts = {}
    for b in p.blocks():
        starts.setdefault(b.round, b.size_before)
    assert len(starts) >= 10
    for i, m in starts.items():
        c = Counter(items[:m])
        assert sum(c.values()) == m
        for x in p.group(i % 2):
            assert abs(c[x] - p.phi * m) <= p.l
        for x in p.group(1 - i % 2):
            assert abs(c[x] - (p.phi - p.eps2) * m) <= p.l


def test_one_round_promotes_to_phi_m_next():
    p = HHLowerBoundPlan(0.3, 0.05, 10_000)
    items = p.items()
    blocks = [b for b in p.blocks() if b.round == 0]
    m0 = blocks[0].size_before
    m1 = blocks[-1].start + blocks[-1].copies
    assert m1 == m0 + p.l * ceil_frac(p.beta * m0)
    c = Counter(items[:m1])
    for x in p.group(1):
        assert c[x] == p.phi * m1


def test_hh_stream_events():
    p = HHLowerBoundPlan(0.3, 0.05, 5000)
    evs = gen_hh_lb_stream(p, 3)
    assert len(evs) == 5000
    assert [e.site for e in evs[:4]] == [1, 2, 3, 1]
    with pytest.raises(ValueError):
        gen_hh_lb_stream(p, 3, placement="whitebox")


def test_hh_change_counter_small():
    # phi = 1/2, eps = 1/4: item 1 low below 1/4, heavy at 1/2
    counter = HHChangeCounter(Fraction(1, 2), Fraction(1, 4))
    assert counter.feed([2, 2, 2, 2, 1, 1, 1, 1], 2) == 1


def test_median_plan_example():
    p = MedianLowerBoundPlan(0.05, 10_000, m0=1000)
    assert p.m0 == 1000
    assert ceil_frac(p.ratio * 1000) == 500
    items = p.items()
    c0 = Counter(items[:1000])
    assert (c0[1], c0[2]) == (400, 600)
    c1 = Counter(items[:1500])
    assert (c1[1], c1[2]) == (900, 600)  # majority swapped: (1/2 + 2eps) * 1500


def test_median_round_invariants():
    p = MedianLowerBoundPlan(0.05, 100_000)
    items = p.items()
    m, i = p.m0, 0
    while m < len(items):
        c = Counter(items[:m])
        b = 1 + i % 2
        assert abs(c[b] - p.lo_share * m) <= 1
        assert abs(c[3 - b] - (1 - p.lo_share) * m) <= 1
        m += ceil_frac(p.ratio * m)
        i += 1


def test_median_plan_needs_small_eps():
    with pytest.raises(ValueError):
        MedianLowerBoundPlan(0.125, 1000)


def test_median_stream_and_counter():
    evs = gen_median_lb_stream(0.05, 20_000, k=2)
    assert len(evs) == 20_000
    assert {e.item for e in evs} == {1, 2}
    changes = MedianChangeCounter().feed([e.item for e in evs], 2)
    plan = MedianLowerBoundPlan(0.05, 20_000)
    assert changes >= math.floor(plan.expected_changes())


def test_whitebox_forces_half_the_sites_at_k8():
    run = simulate("hh", k=8, eps=0.05, n=100_000, phi=0.3, dist="hh-adv:0.3",
                   placement="whitebox")
    assert run.report.ok
    windows = [w for w in run.source.attack.finish() if w.complete]
    assert len({w.round for w in windows}) >= 10
    assert not run.source.attack.failures
    for w in windows:
        assert len(w.triggered) >= 8 // 2


def test_whitebox_k2_forces_a_trigger():
    tr = HHTracker(TrackerConfig(k=2, eps=0.05, phi=0.3, u=4))
    plan = HHLowerBoundPlan(0.3, 0.05, 20_000)
    windows = [w for w in whitebox_attack(tr, plan, 2) if w.complete]
    assert windows
    assert all(len(w.triggered) >= 1 for w in windows)


class HugeThreshold:
    """A broken tracker whose sites never need to speak."""

    def __init__(self, k):
        self.k = k
        self.ledger = CostLedger(k)

    def threshold_probe(self, item):
        return [10**9] * self.k

    def receive(self, site, value, seq):
        pass


def test_broken_tracker_yields_missed_change():
    plan = HHLowerBoundPlan(0.3, 0.05, 5000)
    attack = WhiteboxAttack(plan, 4, HugeThreshold(4))
    sites = [attack.site(i, x) for i, x in enumerate(plan.items()[:plan.n])]
    assert all(0 <= j < 4 for j in sites)
    assert attack.failures
    assert all(w.missed for w in attack.finish())
    # the missed windows violate the correctness inequality sum(n_j - 1) < beta*m_i
    blocks = {b.start: b for b in plan.blocks()}
    starts = [b for b in blocks.values() if b.start < plan.n]
    for w, b in zip(attack.windows, starts):
        assert w.slack_sum >= plan.beta * b.size_before
