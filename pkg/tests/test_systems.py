import pytest

from meanmedian.numeric import Q
from meanmedian.systems import SYSTEMS, get_system, parse_affine, parse_bundle, resolve_bundle


@pytest.mark.parametrize("expr, line", [
    ("3x-1", (3, -1)), ("-x/2+1", (Q(-1, 2), 1)), ("1/2", (0, Q(1, 2))), ("x", (1, 0)),
    ("-10x+1", (-10, 1)), ("2*x", (2, 0)),
])
def test_parse_affine(expr, line):
    assert parse_affine(expr) == tuple(Q(v) for v in line)


@pytest.mark.parametrize("bad", ["", "y", "3xx", "0.5x"])
def test_parse_affine_rejects(bad):
    with pytest.raises(ValueError):
        parse_affine(bad)


def test_spec_and_named_agree():
    a = parse_bundle("0,x,1,1", -1, 1)
    b = resolve_bundle("0x11")
    assert [f for f in a] == [f for f in b]


def test_every_named_system_builds():
    for name in SYSTEMS:
        B = get_system(name).bundle()
        assert len(B) >= 3
    with pytest.raises(ValueError):
        get_system("nope")


def test_kinked_member_is_continuous():
    Y = resolve_bundle("t3-corner")[3]
    assert Y(Q(1, 2)) == 0 and Y(1) == Q(1, 2) and Y(0) == 0
