from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from disttrack.oracle import ExactOracle


def build(values, u=None):
    o = ExactOracle(u or max(values))
    for v in values:
        o.insert(v)
    return o


def test_insert_counts():
    o = ExactOracle(10).insert(5)
    assert o.count(5) == 1 and o.total == 1
    o.insert(5)
    assert o.count(5) == 2 and o.total == 2


def test_insert_outside_universe():
    o = ExactOracle(10)
    with pytest.raises(ValueError):
        o.insert(11)
    with pytest.raises(ValueError):
        o.insert(0)


def test_admissible_hh_example():
    o = build([1, 1, 1, 2])
    assert o.admissible_hh(0.5, 0.2) == ({1}, {2})


def test_admissible_hh_uniform_has_no_mandatory():
    o = build(list(range(1, 11)) * 3)
    mandatory, forbidden = o.admissible_hh(0.2, 0.05)
    assert mandatory == set()
    assert forbidden == set(range(1, 11))


def test_admissible_hh_needs_items():
    with pytest.raises(ValueError):
        ExactOracle(4).admissible_hh(0.5, 0.1)


def test_admissible_quantile_distinct_1_to_100():
    o = build(list(range(1, 101)))
    # x is a phi'-quantile for phi' in [0.4, 0.6] iff at most 60 items are
    # smaller and at most 60 larger: x - 1 <= 60 and 100 - x <= 60.
    assert o.admissible_quantile(0.5, 0.1) == (40, 61)


def test_admissible_quantile_zero_eps_is_exact():
    o = build(list(range(1, 101)))
    # 50 has 49 below and 50 above; 51 has 50 below and 49 above
    assert o.admissible_quantile(0.5, 0) == (50, 51)
    o = build(list(range(1, 100)))
    assert o.admissible_quantile(0.5, 0) == (50, 50)


def brute_hh(values, phi, eps):
    n = len(values)
    counts = {x: values.count(x) for x in set(values)}
    mandatory = {x for x, c in counts.items() if Fraction(c) >= phi * n}
    forbidden = {x for x, c in counts.items() if Fraction(c) < (phi - eps) * n}
    return mandatory, forbidden


fracs = st.fractions(min_value=0, max_value=1, max_denominator=20)


@given(st.lists(st.integers(1, 30), min_size=1, max_size=200), fracs, fracs)
def test_admissible_hh_matches_brute_force(values, phi, eps):
    o = build(values, 30)
    mandatory, forbidden = o.admissible_hh(phi, eps)
    assert (mandatory, forbidden) == brute_hh(values, phi, eps)
    if eps > 0:
        assert not mandatory & forbidden


def brute_quantile_ok(values, x, phi, eps):
    n = len(values)
    less = sum(1 for v in values if v < x)
    greater = sum(1 for v in values if v > x)
    # some phi' in [phi-eps, phi+eps] with less <= phi'*n and greater <= (1-phi')*n
    lo = max(Fraction(less, n), phi - eps)
    hi = min(1 - Fraction(greater, n), phi + eps)
    return max(lo, Fraction(0)) <= min(hi, Fraction(1))


@given(st.lists(st.integers(1, 25), min_size=1, max_size=120), fracs,
       st.fractions(min_value=0, max_value=Fraction(1, 4), max_denominator=20))
def test_admissible_quantile_matches_brute_force(values, phi, eps):
    o = build(values, 25)
    ok = [x for x in range(1, 26) if brute_quantile_ok(values, x, phi, eps)]
    got = o.admissible_quantile(phi, eps)
    assert got == ((ok[0], ok[-1]) if ok else None)
    if got:
        assert ok == list(range(got[0], got[1] + 1))


@given(st.lists(st.integers(1, 15), min_size=1, max_size=100))
def test_rank_is_monotone_and_exact(values):
    o = ExactOracle(15)
    for seq, v in enumerate(values):
        o.insert(v, seq)
    keys = sorted((v, s) for s, v in enumerate(values))
    prev = 0
    for x in range(1, 17):
        r = o.less_than(x)
        assert r == sum(1 for v in values if v < x)
        assert r >= prev
        prev = r
    for i, key in enumerate(keys):
        assert o.rank(key) == i
    assert o.rank((15, 1 << 62)) == len(values)


@given(st.lists(st.integers(1, 12), min_size=1, max_size=150), fracs)
def test_heavy_watch_tracks_mandatory_set(values, phi):
    o = ExactOracle(12)
    w = o.watch_heavy(phi)
    for v in values:
        o.insert(v)
        assert w.current(o.counts, o.total) == o.admissible_hh(phi, 0)[0]
