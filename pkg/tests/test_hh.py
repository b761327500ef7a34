from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disttrack.core import Kind, TrackerConfig
from disttrack.hh import HHTracker
from disttrack.oracle import ExactOracle
from disttrack.simulator import simulate


def warmed(k=2, eps=0.3, phi=0.5, m=100, items=None, mode="exact"):
    """A tracker whose warm-up forwarded exactly m items round-robin."""
    tr = HHTracker(TrackerConfig(k=k, eps=eps, phi=phi, u=1000), mode)
    tr.warmup_target = m
    items = items or [500 + i % 50 for i in range(m)]
    for seq, x in enumerate(items):
        tr.receive(seq % k, x, seq)
    assert tr.started
    return tr, len(items)


def test_threshold_5_all_signal_on_fifth_arrival():
    tr, seq = warmed()
    assert tr.thr == 5  # ceil(0.3 * 100 / 6)
    before = tr.ledger.messages
    for i in range(4):
        tr.receive(0, 1 + i, seq + i)
    assert tr.ledger.messages == before
    tr.receive(0, 9, seq + 4)
    assert tr.ledger.count(Kind.ALL_SIGNAL) == 1
    assert tr.cm == 105


def test_five_copies_trigger_both_signals():
    tr, seq = warmed()
    for i in range(5):
        tr.receive(1, 7, seq + i)
    assert tr.ledger.count(Kind.ALL_SIGNAL) == 1
    assert tr.ledger.count(Kind.ITEM_SIGNAL) == 1
    assert tr.cmx[7] == 5


def test_single_arrival_is_silent():
    tr, seq = warmed()
    before = tr.ledger.fingerprint()
    tr.receive(0, 3, seq)
    assert tr.ledger.fingerprint() == before


def test_item_signal_adds_threshold():
    items = [7] * 10 + [500 + i for i in range(90)]
    tr, seq = warmed(items=items)
    assert tr.cmx[7] == 10
    for i in range(5):
        tr.receive(0, 7, seq + i)
    assert tr.cmx[7] == 15


def test_kth_all_signal_resynchronises():
    tr, seq = warmed()
    rounds = tr.rounds_completed
    # each site sends one all-signal after 5 arrivals; the second completes k=2
    for i in range(10):
        tr.receive(i // 5, 1 + i, seq + i)
    assert tr.rounds_completed == rounds + 1
    assert tr.cm == 110
    assert tr.site_m == [110, 110]
    assert tr.dm == [0, 0]
    assert tr.thr == 6  # ceil(0.3 * 110 / 6)


def test_item_counters_survive_resync():
    tr, seq = warmed()
    tr.receive(0, 7, seq)
    tr.receive(0, 7, seq + 1)
    for i in range(10):
        tr.receive(i % 2, 100 + i, seq + 2 + i)
    assert tr.rounds_completed >= 1
    assert tr.dmx[0][7] == 2


def classifier(phi, eps, cm, cmx):
    tr = HHTracker(TrackerConfig(k=2, eps=eps, phi=phi, u=10))
    tr.cm = cm
    tr.cmx = {1: cmx}
    return tr.classify(1)


def test_classify_examples():
    assert classifier(0.1, 0.1, 1000, 200)
    assert not classifier(0.1, 0.1, 1000, 0)
    assert not classifier(0.2, 0.2, 1000, 0)


def test_classify_boundary_is_inclusive():
    # cut at phi - eps/2 = 0.5 - 0.05 = 0.45
    assert classifier(0.5, 0.1, 1000, 450)
    assert not classifier(0.5, 0.1, 1000, 449)


@given(st.fractions(min_value=Fraction(1, 50), max_value=1, max_denominator=50),
       st.fractions(min_value=Fraction(1, 50), max_value=Fraction(1, 2), max_denominator=50),
       st.integers(1, 10_000), st.integers(0, 10_000))
def test_classify_matches_rational_rule(phi, eps, cm, cmx):
    if eps > phi:
        return
    assert classifier(phi, eps, cm, cmx) == (Fraction(cmx, cm) >= phi - eps / 2)


def test_report_empty_before_any_item():
    tr = HHTracker(TrackerConfig(k=2, eps=0.1, phi=0.5))
    assert tr.reported() == set()


def test_single_item_stream_reported():
    tr = HHTracker(TrackerConfig(k=2, eps=0.1, phi=0.5, u=10))
    for seq in range(200):
        tr.receive(seq % 2, 3, seq)
        assert tr.reported() == {3}


def test_requires_phi_at_least_eps():
    with pytest.raises(ValueError):
        HHTracker(TrackerConfig(k=2, eps=0.2, phi=0.1))


def test_full_run_has_no_violations_and_expected_accounting():
    run = simulate("hh", k=4, eps=0.1, n=10_000, phi=0.2)
    assert run.report.ok
    assert run.report.checkpoints == 10_000
    tr = run.tracker
    assert tr.all_signal_count == tr.k * tr.rounds_completed + tr.all_signals
    assert tr.item_signal_count <= tr.all_signal_count + tr.k * (tr.round + 1)


def test_reported_matches_full_scan():
    run = simulate("hh", k=3, eps=0.05, n=5000, phi=0.1, dist="zipf:1.2",
                   checkpoint_every=100)
    assert run.tracker.reported() == run.tracker.report()


def test_threshold_probe_counts_remaining_copies():
    tr, seq = warmed()
    tr.receive(0, 7, seq)
    tr.receive(0, 8, seq + 1)
    tr.receive(1, 7, seq + 2)
    assert tr.threshold_probe(7) == [3, 4]
    assert tr.threshold_probe(9) == [3, 4]


@settings(deadline=None, max_examples=25)
@given(st.lists(st.integers(1, 12), min_size=1, max_size=400), st.integers(2, 5),
       st.sampled_from([0.1, 0.2, 0.3]), st.sampled_from(["exact", "sketch"]))
def test_random_streams_meet_contract(items, k, eps, mode):
    phi = max(eps, 0.3)
    tr = HHTracker(TrackerConfig(k=k, eps=eps, phi=phi, u=12), mode)
    o = ExactOracle(12)
    for seq, x in enumerate(items):
        o.insert(x, seq)
        tr.receive((seq * 7) % k, x, seq)
        assert tr.check_output(o, seq) == []
        if mode == "exact":
            assert tr.check_invariants(o, (seq * 7) % k, x, seq) == []


def test_sketch_mode_run():
    run = simulate("hh", k=4, eps=0.1, n=20_000, phi=0.2, dist="zipf:1.2", mode="sketch")
    assert run.report.ok
