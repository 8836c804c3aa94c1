from meanmedian.dynamics import check_equivalence, iterate_bundle, limit_function
from meanmedian.numeric import AffineMap, Mobius, Q
from meanmedian.orbit import iterate_until_stable
from meanmedian.pwa import Bundle
from meanmedian.systems import resolve_bundle


def test_early_functions_of_0x1():
    o = iterate_bundle(Bundle.of_lines(Q(1, 2), Q(2, 3), [0, (1, 0), 1]), 5, stop_when_stable=False)
    Y4, Y5 = o.Y(4), o.Y(5)
    assert Y4.slopes == (3,) and Y4.intercepts == (-1,)
    assert Y5(Q(3, 5)) == 6 * Q(3, 5) - Q(5, 2)


def test_functional_orbit_matches_scalar_orbit():
    B = resolve_bundle("0x11", (Q(-1), Q(1)))
    o = iterate_bundle(B, 20, stop_when_stable=False)
    for x in (Q(-1, 3), Q(1, 7), Q(2, 3)):
        r = iterate_until_stable(B.values(x), keep_history=True)
        ys = B.values(x) + r.history
        ys += [r.limit] * (20 - len(ys))
        assert [o.Y(k)(x) for k in range(1, 21)] == ys[:20]


def test_limit_map_reports_unresolved_when_capped():
    B = resolve_bundle("0x11", (Q(1, 1000), Q(1, 500)))
    sm = limit_function(B, None, 8)
    assert not sm.fully_resolved and sm.limit() is None


def test_self_equivalence_check_detects_wrong_map():
    B = resolve_bundle("0x11", (Q(-10), Q(10)))
    mu = Mobius(1, 0, 1, -1)
    good = lambda x: AffineMap(1 / (1 - x), -x / (1 - x))
    bad = lambda x: AffineMap(1, 0)
    xs = [Q(k, 7) for k in range(-6, 7) if k]
    assert check_equivalence(B, B, mu, good, xs)
    assert not check_equivalence(B, B, mu, bad, xs)
