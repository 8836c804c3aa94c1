import pytest

from meanmedian.numeric import Q
from meanmedian.orbit import (RationalMultiset, core, core_step, iterate_until_stable, limit_and_tau, mean,
                              median, mmm_step)


def test_median_and_mean():
    assert median([3, 1, 2]) == 2
    assert median([4, 1, 2, 3]) == Q(5, 2)
    assert mean([1, 2, 6]) == 3
    with pytest.raises(ValueError):
        median([])


def test_step_is_n_plus_one_median_minus_sum():
    xs = [0, Q(1, 3), 1]
    assert mmm_step(xs) == 4 * Q(1, 3) - Q(4, 3)


def test_multiset_keeps_order():
    s = RationalMultiset([3, 1, 2, 2])
    s.insert(Q(3, 2))
    assert list(s) == [1, Q(3, 2), 2, 2, 3]
    assert s.median() == 2
    assert list(s.core()) == [Q(3, 2), 2, 2]


def test_core_sizes():
    assert core([1, 2, 3, 4]) == [2, 3]
    assert core([5, 1, 2, 3, 4]) == [2, 3, 4]


def test_core_step_matches_direct_step():
    # medians of this orbit never decrease
    xs = [0, Q(3, 5), 1]
    r = iterate_until_stable(xs, keep_history=True)
    ys = [Q(x) for x in xs] + r.history
    for n in range(len(xs) + 4, len(ys) + 1):
        lam = core(ys[:n - 2])
        assert core_step(ys[n - 2], lam, n) == ys[n - 1]


def test_already_stable_set():
    # [0, 1/2, 1] adjoins 1/2 and the median never moves again
    r = iterate_until_stable([0, Q(1, 2), 1])
    assert r.limit == Q(1, 2) and r.transit_time == 4


def test_cap_reports_no_limit():
    r = iterate_until_stable([0, Q(1, 10000), 1, 1], max_steps=10)
    assert r.limit is None and not r.stabilized and r.steps_taken == 10


def test_limit_and_tau_probe():
    assert limit_and_tau([0, Q(1, 10000), 1, 1]) == (Q(2597, 5000), 63)
