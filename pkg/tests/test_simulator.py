import pytest

from disttrack.core import ArrivalEvent, Kind, TrackerConfig
from disttrack.simulator import (SimulationRun, StreamSource, default_checkpoint, parse_dist,
                                 read_trace, simulate, write_trace)


def test_parse_dist():
    assert parse_dist("uniform") == ("uniform", None)
    assert parse_dist("zipf:1.2") == ("zipf", "1.2")
    assert parse_dist("hh-adv:0.3") == ("hh-adv", "0.3")
    for bad in ("normal", "zipf", "zipf:-1", "trace", "median-adv:3"):
        with pytest.raises(ValueError):
            parse_dist(bad)


@pytest.mark.parametrize("dist", ["uniform", "zipf:1.2", "sorted", "permutation"])
def test_sources_emit_exactly_n_ordered_events(dist):
    src = StreamSource(dist, 1234, 3, u=500, seed=9)
    evs = list(src.events())
    assert len(evs) == 1234
    assert [e.seq for e in evs] == list(range(1234))
    assert all(1 <= e.site <= 3 and 1 <= e.item <= 500 for e in evs)
    if dist == "sorted":
        assert [e.item for e in evs] == sorted(e.item for e in evs)
    if dist == "permutation":
        assert sorted(e.item for e in evs[:500]) == list(range(1, 501))


def test_same_seed_same_stream():
    a = [e for e in StreamSource("zipf:1.1", 500, 4, seed=3, placement="random").events()]
    b = [e for e in StreamSource("zipf:1.1", 500, 4, seed=3, placement="random").events()]
    c = [e for e in StreamSource("zipf:1.1", 500, 4, seed=4, placement="random").events()]
    assert a == b
    assert a != c


def test_bad_source_arguments():
    with pytest.raises(ValueError):
        StreamSource("uniform", -1, 2)
    with pytest.raises(ValueError):
        StreamSource("uniform", 10, 2, placement="nearest")
    with pytest.raises(ValueError):
        StreamSource("uniform", 10, 2, placement="whitebox")


def test_empty_stream():
    for tracker in ("hh", "quantile", "allq"):
        run = simulate(tracker, k=2, eps=0.1, n=0)
        assert run.ledger.messages == 0
        assert run.report.ok and run.report.checkpoints == 0


def test_out_of_order_event_rejected():
    run = SimulationRun(TrackerConfig(k=2, eps=0.1, u=10), "hh")
    run.step(ArrivalEvent(5, 1, 3))
    with pytest.raises(ValueError):
        run.step(ArrivalEvent(5, 2, 3))
    with pytest.raises(ValueError):
        run.step(ArrivalEvent(4, 2, 3))
    with pytest.raises(ValueError):
        run.step(ArrivalEvent(6, 3, 3))
    with pytest.raises(ValueError):
        run.step(ArrivalEvent(7, 1, 11))


def test_run_to_completion_needs_fresh_run():
    run = SimulationRun(TrackerConfig(k=2, eps=0.1, u=10), "hh")
    run.step(ArrivalEvent(0, 1, 3))
    with pytest.raises(ValueError):
        run.run_to_completion(StreamSource("uniform", 5, 2, u=10))


def warmed_hh_run():
    """eps=0.3, k=2 and a warm-up of 100 items: per-site threshold 5."""
    run = SimulationRun(TrackerConfig(k=2, eps=0.3, phi=0.5, u=200), "hh")
    run.tracker.warmup_target = 100
    for seq in range(100):
        run.step(ArrivalEvent(seq, seq % 2 + 1, 1 + seq % 50))
    return run


def test_below_threshold_event_changes_only_oracle():
    run = warmed_hh_run()
    before = run.ledger.fingerprint()
    run.step(ArrivalEvent(100, 1, 150))
    assert run.ledger.fingerprint() == before
    assert run.oracle.count(150) == 1 and run.oracle.total == 101


def test_event_completing_threshold_sends_one_all_signal():
    run = warmed_hh_run()
    for seq in range(100, 104):
        run.step(ArrivalEvent(seq, 1, 60 + seq))
    assert run.ledger.count(Kind.ALL_SIGNAL) == 0
    run.step(ArrivalEvent(104, 1, 70))
    assert run.ledger.count(Kind.ALL_SIGNAL) == 1


def test_hh_run_example():
    run = simulate("hh", k=4, eps=0.1, n=10_000, phi=0.2)
    assert run.report.ok


def test_median_run_example():
    run = simulate("quantile", k=8, eps=0.05, n=100_000, checkpoint_every=10)
    assert run.report.ok
    again = simulate("quantile", k=8, eps=0.05, n=100_000, checkpoint_every=10,
                     invariants=False)
    assert again.ledger.fingerprint() == run.ledger.fingerprint()


def test_trace_replay_is_identical(tmp_path):
    src = StreamSource("zipf:1.3", 5000, 3, u=1000, seed=2, placement="random")
    path = tmp_path / "events.txt"
    write_trace(path, src.events())
    assert read_trace(path)[:3] == list(src.events())[:3]
    for tracker in ("hh", "quantile", "allq"):
        a = simulate(tracker, k=3, eps=0.05, n=5000, dist="zipf:1.3", u=1000, seed=2,
                     placement="random", phi=0.2)
        b = simulate(tracker, k=3, eps=0.05, n=5000, dist=f"trace:{path}", u=1000, phi=0.2)
        assert a.ledger.fingerprint() == b.ledger.fingerprint()
        assert a.report.violations == b.report.violations
        assert a.tracker.answer() == b.tracker.answer()


def test_trace_file_format(tmp_path):
    path = tmp_path / "t.txt"
    write_trace(path, [ArrivalEvent(0, 1, 5), ArrivalEvent(1, 2, 7)])
    assert path.read_text() == "0 1 5\n1 2 7\n"


@pytest.mark.parametrize("tracker", ["hh", "quantile", "allq"])
def test_correctness_does_not_depend_on_placement(tracker):
    ledgers = []
    for placement in ("rr", "random"):
        run = simulate(tracker, k=4, eps=0.05, n=20_000, dist="zipf:1.2", phi=0.2,
                       placement=placement)
        assert run.report.ok
        ledgers.append(run.ledger.messages)
    assert ledgers[0] != ledgers[1]


def test_default_checkpoint():
    assert default_checkpoint("hh", 10**5) == 1
    assert default_checkpoint("hh", 10**6) == 10
    assert default_checkpoint("quantile", 250_001) == 3
    assert default_checkpoint("allq", 100) == 1000
