"""Property suites: functional engine vs scalar orbits, recursions, equivariance, tau jumps, lifts."""

from fractions import Fraction

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from meanmedian import xpoints as xp
from meanmedian.dynamics import iterate_bundle, limit_function
from meanmedian.normal_form import nf_lift, nf_run
from meanmedian.numeric import Q
from meanmedian.orbit import core, core_step, iterate_until_stable, mmm_step
from meanmedian.pwa import Bundle, PiecewiseAffine
from meanmedian.systems import resolve_bundle

small = st.fractions(min_value=-3, max_value=3, max_denominator=7)
nonzero = small.filter(lambda v: v != 0)
line = st.tuples(small, small)
PTS = 50


def _history(xs, n):
    r = iterate_until_stable(xs, max(n, 1), keep_history=True)
    ys = [Q(x) for x in xs] + r.history
    if r.stabilized:
        ys += [r.limit] * (n - len(ys))
    return ys[:n]


@settings(max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.lists(line, min_size=3, max_size=5),
       st.lists(st.fractions(min_value=-1, max_value=1, max_denominator=97), min_size=PTS, max_size=PTS))
def test_functional_orbit_agrees_with_scalar_orbits(lines, xs):
    B = Bundle.of_lines(Q(-1), Q(1), [(Q(a), Q(b)) for a, b in lines])
    n = len(B) + 8
    o = iterate_bundle(B, n, stop_when_stable=False)
    for x in xs:
        x = Q(x)
        assert [o.Y(k)(x) for k in range(1, n + 1)] == _history(B.values(x), n)


def _nondecreasing_prefix(meds):
    k = 1
    while k < len(meds) and meds[k] >= meds[k - 1]:
        k += 1
    return k


@settings(max_examples=200, deadline=None)
@given(st.lists(st.fractions(min_value=-20, max_value=20, max_denominator=12), min_size=2, max_size=7))
def test_core_recursion_matches_direct_recursion(xs):
    r = iterate_until_stable(xs, 30, keep_history=True)
    ys = [Q(x) for x in xs] + r.history
    meds = r.median_history
    n0 = len(xs)
    # meds[k] is the median of the first n0 + k elements
    good = _nondecreasing_prefix(meds)
    for n in range(n0 + 4, min(len(ys), n0 + good - 1) + 1):
        assert core_step(ys[n - 2], core(ys[:n - 2]), n) == ys[n - 1]
        if n % 2 == 0:
            # x_n - x_{n-1} = M_{n-1} - M_{n-3}
            assert ys[n - 1] - ys[n - 2] == meds[n - 1 - n0] - meds[n - 3 - n0]


@settings(max_examples=100, deadline=None)
@given(st.lists(small, min_size=2, max_size=7), nonzero, small)
def test_affine_equivariance(xs, a, b):
    a, b = Q(a), Q(b)
    xs = [Q(x) for x in xs]
    assert mmm_step([a * x + b for x in xs]) == a * mmm_step(xs) + b
    r, s = iterate_until_stable(xs, 300), iterate_until_stable([a * x + b for x in xs], 300)
    assert r.transit_time == s.transit_time
    if r.stabilized:
        assert s.limit == a * r.limit + b


@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=Fraction(1, 2), max_value=Fraction(2, 3), max_denominator=200))
def test_medians_of_0x1_orbits_are_monotone(x):
    r = iterate_until_stable([0, Q(x), 1], 3000, keep_history=True)
    d = [b - a for a, b in zip(r.median_history, r.median_history[1:])]
    assert all(v >= 0 for v in d) or all(v <= 0 for v in d)


# transit time jump: [c, c, -s x, 0, 0] near 0 has M_5 = min(-s x, 0) and M_6 = 0 or the mean of the pair

@settings(max_examples=60, deadline=None)
@given(st.fractions(min_value=-5, max_value=Fraction(-1, 10), max_denominator=10),
       st.fractions(min_value=Fraction(1, 10), max_value=5, max_denominator=10),
       st.integers(min_value=3, max_value=12))
def test_tau_jumps_by_two_across_the_crossing(c, s, e):
    c, s = Q(c), Q(s)
    d = Q(1, 10 ** e)
    left = iterate_until_stable([c, c, s * d, 0, 0])
    right = iterate_until_stable([c, c, -s * d, 0, 0])
    assert (left.limit, right.limit) == (0, 0)
    assert (left.transit_time, right.transit_time) == (7, 9)


def test_tau_jump_in_the_functional_engine():
    B = Bundle.of_lines(Q(-1, 100), Q(1, 100), [-1, -1, (-1, 0), 0, 0])
    sm = limit_function(B, None, 20)
    assert sm.fully_resolved
    assert sm.tau_at(Q(-1, 1000)) == 7 and sm.tau_at(Q(1, 1000)) == 9
    assert sm.limit() == PiecewiseAffine.constant(Q(-1, 100), Q(1, 100), 0)


_B712 = resolve_bundle("0x1")
_REC712 = xp.classify_xpoint(_B712, Q(7, 12))
_ORB712 = iterate_bundle(_B712, 12, stop_when_stable=False)
_NF9 = nf_run(9)


@settings(max_examples=40, deadline=None)
# the neighbourhood where the lift holds shrinks with n; up to n = 40 it contains |x - 7/12| <= 1/2000
@given(st.fractions(min_value=Fraction(-1, 2000), max_value=Fraction(1, 2000), max_denominator=10 ** 7)
       .filter(lambda v: v != 0))
def test_normal_form_lift_at_seven_twelfths(d):
    p = Q(7, 12)
    x = p + Q(d)
    i, j = _REC712.pair
    Yi, Yj = _ORB712.Y(i), _ORB712.Y(j)
    lo, hi = (Yi, Yj) if Yi(x) < Yj(x) else (Yj, Yi)
    lift = nf_lift(lo, hi, _NF9, x, range(9, 41))
    ys = _history(_B712.values(x), 40)
    assert all(lift[n] == ys[n - 1] for n in range(9, 41))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.fractions(min_value=Fraction(1, 20), max_value=1, max_denominator=20), small),
                min_size=1, max_size=5))
def test_piecewise_json_round_trip(steps):
    pts, x = [], Q(0)
    for dx, y in steps:
        pts.append((x, Q(y)))
        x += Q(dx)
    pts.append((x, Q(0)))
    f = PiecewiseAffine.from_points(pts)
    assert PiecewiseAffine.from_dict(f.to_dict()) == f
