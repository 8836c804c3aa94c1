"""Bundle specifications: affine expressions in x, and the named systems used by the experiments."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .numeric import Q
from .pwa import Bundle, PiecewiseAffine

_TERM = re.compile(r"^([+-]?)(\d+(?:/\d+)?)?\*?(x)?(?:/(\d+))?$")


def parse_affine(expr: str):
    """'3x-1', '-x/2+1', '1/2', 'x' -> (slope, intercept)."""
    s = expr.replace(" ", "")
    if not s:
        raise ValueError("empty expression")
    terms = re.findall(r"[+-]?[^+-]+", s)
    if "".join(terms) != s:
        raise ValueError(f"cannot parse {expr!r}")
    slope, icpt = Q(0), Q(0)
    for t in terms:
        m = _TERM.match(t)
        if not m or (m.group(2) is None and m.group(3) is None):
            raise ValueError(f"cannot parse term {t!r} in {expr!r}")
        sign = -1 if m.group(1) == "-" else 1
        c = Q(m.group(2)) if m.group(2) else Q(1)
        if m.group(4):
            c = c / int(m.group(4))
        if m.group(3):
            slope += sign * c
        else:
            icpt += sign * c
    return slope, icpt


def parse_bundle(spec: str, lo, hi) -> Bundle:
    """Comma-separated affine expressions, e.g. '0,x,1,1'."""
    parts = [p for p in spec.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty bundle")
    return Bundle.of_lines(Q(lo), Q(hi), [parse_affine(p) for p in parts])


@dataclass(frozen=True)
class NamedSystem:
    name: str
    description: str
    interval: tuple

    def bundle(self, lo=None, hi=None) -> Bundle:
        lo = Q(self.interval[0] if lo is None else lo)
        hi = Q(self.interval[1] if hi is None else hi)
        return _BUILDERS[self.name](lo, hi)


def _kink(lo, hi, x0, left, right):
    """Continuous function equal to the affine `left` before x0 and `right` after (both (slope, intercept))."""
    x0 = Q(x0)
    if not lo < x0 < hi:
        return PiecewiseAffine.affine(lo, hi, *(left if hi <= x0 else right))
    return PiecewiseAffine([lo, x0, hi], [left[0], right[0]], [left[1], right[1]])


_BUILDERS = {
    "0x1": lambda lo, hi: Bundle.of_lines(lo, hi, [0, (1, 0), 1]),
    "0x11": lambda lo, hi: Bundle.of_lines(lo, hi, [0, (1, 0), 1, 1]),
    "00x111": lambda lo, hi: Bundle.of_lines(lo, hi, [0, 0, (1, 0), 1, 1, 1]),
    "alpha-10": lambda lo, hi: Bundle.of_lines(lo, hi, [0, (1, 0), (-10, 1), (-10, 1)]),
    "alpha-388": lambda lo, hi: Bundle.of_lines(lo, hi, [0, (1, 0), (-388, 1), (-388, 1)]),
    "m20x1": lambda lo, hi: Bundle.of_lines(lo, hi, [-2, 0, (1, 0), 1]),
    "t3-corner": lambda lo, hi: Bundle.of_lines(
        lo, hi, [-5, -4, -3, _kink(lo, hi, Q(1, 2), (0, 0), (1, Q(-1, 2))), (1, 0), 3, 3]),
    "rank21": lambda lo, hi: Bundle.of_lines(
        lo, hi, [0, (1, 0), 1, _kink(lo, hi, 0, (0, 1), (Q(1, 2), 1))]),
}

SYSTEMS = {
    "0x1": NamedSystem("0x1", "[0, x, 1]", (Q(1, 2), Q(2, 3))),
    "0x11": NamedSystem("0x11", "[0, x, 1, 1]", (Q(-1), Q(1))),
    "00x111": NamedSystem("00x111", "[0, 0, x, 1, 1, 1]", (Q(-1), Q(1))),
    "alpha-10": NamedSystem("alpha-10", "[0, x, -10x+1, -10x+1]", (Q(-1), Q(1))),
    "alpha-388": NamedSystem("alpha-388", "[0, x, -388x+1, -388x+1]", (Q(-1), Q(1))),
    "m20x1": NamedSystem("m20x1", "[-2, 0, x, 1]", (Q(-1), Q(1))),
    "t3-corner": NamedSystem("t3-corner", "[-5, -4, -3, Y, x, 3, 3], Y = 0 then x-1/2 past 1/2", (Q(-1), Q(4))),
    "rank21": NamedSystem("rank21", "[0, x, 1, Y], Y = 1 then x/2+1 past 0", (Q(-1), Q(1))),
}


def get_system(name: str) -> NamedSystem:
    try:
        return SYSTEMS[name]
    except KeyError:
        raise ValueError(f"unknown system {name!r}; known: {', '.join(sorted(SYSTEMS))}") from None


def resolve_bundle(spec: str, interval=None) -> Bundle:
    """A named system or a comma-separated spec; interval defaults to the system's own or [0, 1]."""
    if spec in SYSTEMS:
        sysm = SYSTEMS[spec]
        lo, hi = interval if interval else sysm.interval
        return sysm.bundle(lo, hi)
    lo, hi = interval if interval else (Q(0), Q(1))
    return parse_bundle(spec, lo, hi)
