import pytest

from meanmedian.numeric import Q
from meanmedian.pwa import (Bundle, PiecewiseAffine, bundle_median, equality_intervals, intersections,
                            lower, mmm_image, upper)


def tent():
    return PiecewiseAffine.from_points([(0, 0), (1, 1), (2, 0)])


def test_evaluate_and_merge():
    f = tent()
    assert f(Q(1, 2)) == Q(1, 2) and f(Q(3, 2)) == Q(1, 2)
    g = PiecewiseAffine([0, 1, 2], [1, 1], [0, 0])
    assert g.breaks == (0, 2)


def test_rejects_discontinuity_and_outside_points():
    with pytest.raises(ValueError):
        PiecewiseAffine([0, 1, 2], [1, 0], [0, 0])
    with pytest.raises(ValueError):
        tent()(3)


def test_envelopes():
    f, g = tent(), PiecewiseAffine.constant(0, 2, Q(1, 2))
    assert upper(f, g)(1) == 1 and upper(f, g)(0) == Q(1, 2)
    assert lower(f, g)(1) == Q(1, 2) and lower(f, g)(0) == 0


def test_intersections_transversal_and_tangent():
    f = tent()
    cr, ov = intersections(f, PiecewiseAffine.constant(0, 2, Q(1, 2)))
    assert [c.x for c in cr] == [Q(1, 2), Q(3, 2)] and all(c.transversal for c in cr) and not ov
    cr, _ = intersections(f, PiecewiseAffine.constant(0, 2, 1))
    assert [c.x for c in cr] == [1] and not cr[0].transversal
    ov = equality_intervals(f, PiecewiseAffine.affine(0, 2, 1, 0))
    assert ov == [(0, 1)]


def test_bundle_median_of_three_lines():
    B = Bundle.of_lines(Q(0), Q(1), [0, (1, 0), 1])
    M = bundle_median(B)
    assert M(Q(1, 3)) == Q(1, 3)
    Y4 = mmm_image(B)
    assert Y4(Q(1, 2)) == Q(1, 2) and Y4.slopes == (3,)


def test_json_round_trip():
    f = tent()
    assert PiecewiseAffine.from_dict(f.to_dict()) == f
