import pytest

from meanmedian import xpoints as xp
from meanmedian.numeric import AffineMap, Mobius, Q
from meanmedian.orbit import iterate_until_stable
from meanmedian.systems import resolve_bundle


@pytest.fixture(scope="module")
def core_interval():
    return resolve_bundle("0x1", (Q(1, 2), Q(2, 3)))


def test_zero_in_0x11_is_regular_rank_two():
    B = resolve_bundle("0x11", (Q(-1), Q(1)))
    r = xp.classify_xpoint(B, Q(0))
    assert r.regular and r.active and r.proper
    assert r.monotonic == "nondecreasing"
    assert (r.left_rank, r.right_rank) == (2, 2)
    assert r.tau == 5 and r.m_at_p == Q(1, 2)


def test_half_in_0x1_reverses():
    r = xp.classify_xpoint(resolve_bundle("0x1", (Q(0), Q(1))), Q(1, 2))
    assert r.monotonic == "reversing"


def test_standard_auxiliary_functions(core_interval):
    r = xp.classify_xpoint(core_interval, Q(999, 1798))
    value, slope, _ = r.germs[r.standard_auxiliary - 1]
    assert r.standard_auxiliary == 9 and (slope, value - slope * r.p) == (15, -7)
    r = xp.classify_xpoint(core_interval, Q(13, 23))
    assert r.y_set == [10, 19] and r.standard_auxiliary == 10


def test_ranks_can_differ_by_side():
    r = xp.classify_xpoint(resolve_bundle("rank21"), Q(0))
    assert (r.left_rank, r.right_rank) == (2, 1)


def test_xpoint_membership(core_interval):
    assert xp.is_xpoint(core_interval, Q(7, 12))
    assert not xp.is_xpoint(core_interval, Q(10, 19))


def test_triad_symmetry_of_0x11():
    B = resolve_bundle("0x11", (Q(-1), Q(1)))
    r = xp.classify_xpoint(B, Q(0))
    s = xp.xpoint_symmetry(r)
    assert s.mu == Mobius(1, 0, 1, -1)
    x = Q(1, 5)
    assert s.f(x)(Q(2)) == (2 - x) / (1 - x)
    assert xp.verify_inheritance(B, r, [Q(-1, 5), Q(1, 7), Q(1, 3)], (5, 40))


def test_pseudotriad_at_half():
    s = xp.symmetry((3, -1), (1, 0), (0, 1), (3, -1), (1, 0), (0, 0), "pseudotriad")
    assert s.mu == Mobius(-1, 1, 0, 1)
    assert s.f(Q(1, 3))(Q(1, 4)) == Q(3, 4)
    with pytest.raises(ValueError):
        xp.symmetry((3, -1), (1, 0), (0, 1), (3, -1), (1, 0), (0, 0), "triad")


def test_non_involution_at_zero_of_m20x1():
    # x and 0 cross at 0; the auxiliary is 1 on the right and -2 on the left
    s = xp.symmetry((1, 0), (0, 0), (0, 1), (1, 0), (0, 0), (0, -2), "pseudotriad")
    assert s.mu == Mobius(-2, 0, 0, 1) and not s.mu.is_involution()
    assert all(s.holds_at(Q(k, 50)) for k in range(1, 10))


def test_degenerate_triads_rejected():
    with pytest.raises(ValueError):
        xp.symmetry((1, 0), (1, 1), (0, 1), (1, 0), (0, 0), (0, 2))
    with pytest.raises(ValueError):
        xp.symmetry((1, 0), (0, 0), (2, 0), (1, 0), (0, 0), (0, 2))


def test_harmonic_symmetry():
    mu, f = xp.harmonic_symmetry(Q(1, 3), Q(2), Q(5))
    assert mu.is_involution() and mu(Q(1, 3)) == Q(1, 3) and mu(2) == 2
    x = Q(1, 2)
    assert f(x)(Q(5)) == 5
    mu, _ = xp.harmonic_symmetry(Q(1, 2), None, Q(1, 2))
    assert mu(Q(1, 5)) == Q(4, 5)
    with pytest.raises(ValueError):
        xp.harmonic_symmetry(1, 1, 0)


@pytest.mark.parametrize("n", [2, 3])
def test_standard_triad_not_inherited_but_replacement_is(n):
    from meanmedian.pwa import Bundle
    B = Bundle.of_lines(Q(-1), Q(1), [0] * n + [(1, 0)] + [1] * (n + 1))
    r = xp.classify_xpoint(B, Q(0))
    assert not r.proper and r.tau == 2 * n + 3
    samples = [Q(k, 1000) for k in (1, 3, 7, -2, -5)]
    with pytest.raises(xp.PreconditionError):
        xp.verify_inheritance(B, r, samples, (2 * n + 3, 40))
    triad = (2 * n + 3, 2 * n + 4, (n + 1, 1))
    assert xp.xpoint_symmetry(r, triad).mu == Mobius(n, 0, 1, -1)
    assert xp.verify_inheritance(B, r, samples, (2 * n + 3, 40), triad)


def test_inheritance_negative_control():
    B = resolve_bundle("0x11", (Q(-1), Q(1)))
    r = xp.classify_xpoint(B, Q(0))
    samples = [Q(k, 1000) for k in (-9, -5, -2, -1, 1, 2, 3, 5, 7, 11)]
    assert xp.verify_inheritance(B, r, samples, (5, 63))
    s = xp.xpoint_symmetry(r)
    nudged = lambda x: AffineMap(s.f(x).slope, s.f(x).intercept + Q(1, 10 ** 6))
    assert not xp.verify_inheritance(B, r, samples, (5, 63), pair=(s.mu, nudged))


def test_tractability_indices_differ_by_side():
    B = resolve_bundle("alpha-10")
    r = xp.classify_xpoint(B, Q(0))
    right = xp.tractability(B, r, "right")
    left = xp.tractability(B, r, "left")
    assert (right.index, right.domain) == (5, (Q(0), Q(1, 13)))
    assert (left.index, left.domain) == (7, (Q(-1, 2), Q(0)))


def test_not_left_tractable():
    B = resolve_bundle("alpha-388")
    r = xp.classify_xpoint(B, Q(0))
    assert not xp.tractability(B, r, "left", ell_max=15).ok
    assert xp.tractability(B, r, "right").ok


def test_corner_below_auxiliary_breaks_t3():
    B = resolve_bundle("t3-corner")
    r = xp.classify_xpoint(B, Q(0))
    sa = xp.SideAnalysis(B, r, "right")
    att = sa.check_index(9)
    assert att["T1"] and att["T2"] and not att["T3"]
    assert att["p_star"] == 3
    x, value, k = att["witness"]["T3"]
    assert (x, k) == (Q(1, 2), 9)
    # the witness value is Y_9 at the corner, computed independently from the scalar orbit
    h = iterate_until_stable(B.values(x), keep_history=True).history
    assert value == h[9 - len(B) - 1]


def test_fixed_index_must_be_odd_and_late(core_interval):
    r = xp.classify_xpoint(core_interval, Q(7, 12))
    sa = xp.SideAnalysis(core_interval, r, "right")
    with pytest.raises(ValueError):
        sa.tractability(index=10)
    with pytest.raises(ValueError):
        sa.tractability(index=7)


def test_inactive_point_rejected():
    r = xp.classify_xpoint(resolve_bundle("0x1", (Q(0), Q(1))), Q(1, 2))
    assert not r.active
    with pytest.raises(xp.PreconditionError):
        xp.SideAnalysis(resolve_bundle("0x1", (Q(0), Q(1))), r, "right")


def test_census_to_thirteen(core_interval):
    c = xp.census(core_interval, 13)
    assert c.sets[9] == [Q(7, 12)]
    assert c.sets[11] == [Q(9, 16), Q(17, 27)]
    assert c.sets[13] == sorted(Q(v) for v in ("29/54", "67/116", "45/76", "19/31", "7/11"))
    with pytest.raises(ValueError):
        xp.census(core_interval, 12)


def test_rank_one_at_seven_twelfths(core_interval):
    r = xp.classify_xpoint(core_interval, Q(7, 12))
    res = xp.rank1_analysis(core_interval, r)
    for side, bound in (("right", Q(45999, 78748)), ("left", Q(48067, 82508))):
        assert all(res[side].conditions.values())
        assert len(res[side].branches) == 4
    (lo, hi), labels = xp.quasi_regularity_neighborhood(core_interval, r)
    assert (lo, hi) == (Q(48067, 82508), Q(45999, 78748))
    assert labels == {"left": "theorem", "right": "theorem"}
