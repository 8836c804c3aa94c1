"""Exact continuous piecewise-affine functions and pointwise bundle operations."""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from heapq import merge
from typing import Optional, Sequence

from .numeric import Q, Rational, fmt, parse_rational


class PiecewiseAffine:
    """Continuous function on [breaks[0], breaks[-1]]; piece i is slopes[i]*x + intercepts[i]."""

    __slots__ = ("breaks", "slopes", "intercepts")

    def __init__(self, breaks, slopes, intercepts, check: bool = True):
        breaks = tuple(Q(b) for b in breaks)
        slopes = [Q(s) for s in slopes]
        intercepts = [Q(c) for c in intercepts]
        if len(breaks) != len(slopes) + 1 or len(slopes) != len(intercepts) or not slopes:
            raise ValueError("need k+1 breakpoints for k pieces")
        if check:
            for i in range(len(slopes)):
                if not breaks[i] < breaks[i + 1]:
                    raise ValueError("breakpoints must increase strictly")
            for i in range(1, len(slopes)):
                b = breaks[i]
                if slopes[i - 1] * b + intercepts[i - 1] != slopes[i] * b + intercepts[i]:
                    raise ValueError(f"discontinuity at {b}")
        # merge collinear neighbours
        nb, ns, nc = [breaks[0]], [slopes[0]], [intercepts[0]]
        for i in range(1, len(slopes)):
            if slopes[i] == ns[-1] and intercepts[i] == nc[-1]:
                continue
            nb.append(breaks[i])
            ns.append(slopes[i])
            nc.append(intercepts[i])
        nb.append(breaks[-1])
        self.breaks = tuple(nb)
        self.slopes = tuple(ns)
        self.intercepts = tuple(nc)

    # construction

    @classmethod
    def affine(cls, lo, hi, slope, intercept) -> PiecewiseAffine:
        return cls((lo, hi), (slope,), (intercept,), check=False)

    @classmethod
    def constant(cls, lo, hi, c) -> PiecewiseAffine:
        return cls.affine(lo, hi, 0, c)

    @classmethod
    def from_points(cls, pts) -> PiecewiseAffine:
        """Polyline through [(x0, y0), (x1, y1), ...]."""
        pts = [(Q(x), Q(y)) for x, y in pts]
        slopes, ints = [], []
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            s = (y1 - y0) / (x1 - x0)
            slopes.append(s)
            ints.append(y0 - s * x0)
        return cls([p[0] for p in pts], slopes, ints)

    # access

    @property
    def domain(self):
        return self.breaks[0], self.breaks[-1]

    @property
    def lo(self):
        return self.breaks[0]

    @property
    def hi(self):
        return self.breaks[-1]

    def __len__(self):
        return len(self.slopes)

    def _check(self, x):
        if x < self.breaks[0] or x > self.breaks[-1]:
            raise ValueError(f"{x} outside domain [{self.breaks[0]}, {self.breaks[-1]}]")

    def index(self, x, side: str = "right") -> int:
        """Index of the piece containing x, taken just to the right (or left) of x."""
        x = Q(x)
        self._check(x)
        if side == "right":
            i = bisect_right(self.breaks, x) - 1
            return min(i, len(self.slopes) - 1)
        i = bisect_left(self.breaks, x) - 1
        return max(i, 0)

    def __call__(self, x) -> Rational:
        x = Q(x)
        i = self.index(x)
        return self.slopes[i] * x + self.intercepts[i]

    eval = __call__

    def slope_at(self, x, side: str = "right") -> Rational:
        return self.slopes[self.index(x, side)]

    def interior_breaks(self):
        return self.breaks[1:-1]

    def is_affine_at(self, x) -> bool:
        x = Q(x)
        return x not in self.breaks[1:-1]

    def corners(self):
        """Interior breakpoints as (x, y) pairs."""
        return [(b, self(b)) for b in self.breaks[1:-1]]

    def piece_on(self, lo, hi):
        """(slope, intercept) if the function is affine on [lo, hi], else None."""
        i = self.index(lo, "right")
        j = self.index(hi, "left")
        return (self.slopes[i], self.intercepts[i]) if i == j else None

    # transformations

    def restrict(self, lo, hi) -> PiecewiseAffine:
        lo, hi = Q(lo), Q(hi)
        self._check(lo)
        self._check(hi)
        if not lo < hi:
            raise ValueError("empty restriction")
        i = self.index(lo, "right")
        j = self.index(hi, "left")
        bs = [lo] + list(self.breaks[i + 1:j + 1]) + [hi]
        return PiecewiseAffine(bs, self.slopes[i:j + 1], self.intercepts[i:j + 1], check=False)

    def scale(self, a) -> PiecewiseAffine:
        a = Q(a)
        return PiecewiseAffine(self.breaks, [a * s for s in self.slopes],
                               [a * c for c in self.intercepts], check=False)

    def shift(self, b) -> PiecewiseAffine:
        b = Q(b)
        return PiecewiseAffine(self.breaks, self.slopes, [c + b for c in self.intercepts], check=False)

    def map_values(self, a, b) -> PiecewiseAffine:
        """z -> a z + b applied to the values."""
        a, b = Q(a), Q(b)
        return PiecewiseAffine(self.breaks, [a * s for s in self.slopes],
                               [a * c + b for c in self.intercepts], check=False)

    def reflect(self, p) -> PiecewiseAffine:
        """x -> Y(2p - x); the domain is mirrored about p."""
        p = Q(p)
        bs = [2 * p - b for b in reversed(self.breaks)]
        ss = [-s for s in reversed(self.slopes)]
        cs = [c + 2 * p * s for s, c in zip(reversed(self.slopes), reversed(self.intercepts))]
        return PiecewiseAffine(bs, ss, cs, check=False)

    def __neg__(self):
        return self.scale(-1)

    def __add__(self, other):
        if isinstance(other, PiecewiseAffine):
            return affine_combine([(1, self), (1, other)])
        return self.shift(other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, PiecewiseAffine):
            return affine_combine([(1, self), (-1, other)])
        return self.shift(-Q(other))

    def __mul__(self, a):
        return self.scale(a)

    __rmul__ = __mul__

    # comparison

    def __eq__(self, other):
        if not isinstance(other, PiecewiseAffine):
            return NotImplemented
        return (self.breaks == other.breaks and self.slopes == other.slopes
                and self.intercepts == other.intercepts)

    def __hash__(self):
        return hash((self.breaks, self.slopes, self.intercepts))

    def __repr__(self):
        parts = []
        for i, (s, c) in enumerate(zip(self.slopes, self.intercepts)):
            parts.append(f"[{self.breaks[i]},{self.breaks[i + 1]}]: {s}*x{'+' if c >= 0 else ''}{c}")
        return "PWA(" + "; ".join(parts) + ")"

    # serialization

    def to_dict(self) -> dict:
        return {
            "domain": [fmt(self.lo), fmt(self.hi)],
            "breakpoints": [fmt(b) for b in self.breaks],
            "pieces": [{"slope": fmt(s), "intercept": fmt(c)} for s, c in zip(self.slopes, self.intercepts)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> PiecewiseAffine:
        bs = [parse_rational(b) for b in d["breakpoints"]]
        lo, hi = (parse_rational(v) for v in d["domain"])
        if bs[0] != lo or bs[-1] != hi:
            raise ValueError("domain does not match breakpoints")
        return cls(bs, [parse_rational(p["slope"]) for p in d["pieces"]],
                   [parse_rational(p["intercept"]) for p in d["pieces"]])


def pwa_equal(Y: PiecewiseAffine, Z: PiecewiseAffine) -> bool:
    return Y == Z


def _same_domain(funcs):
    lo, hi = funcs[0].domain
    for f in funcs[1:]:
        if f.domain != (lo, hi):
            raise ValueError("functions must share a domain")
    return lo, hi


def common_grid(funcs) -> list:
    """Sorted union of all breakpoints."""
    if len(funcs) == 1:
        return list(funcs[0].breaks)
    out = []
    last = None
    for b in merge(*(f.breaks for f in funcs)):
        if b != last:
            out.append(b)
            last = b
    return out


def _pieces_on_grid(funcs, grid):
    """For each cell of the grid, the piece index of every function."""
    ptr = [0] * len(funcs)
    cells = []
    for g in grid[:-1]:
        row = []
        for k, f in enumerate(funcs):
            i = ptr[k]
            while f.breaks[i + 1] <= g:
                i += 1
            ptr[k] = i
            row.append(i)
        cells.append(row)
    return cells


def affine_combine(terms) -> PiecewiseAffine:
    """sum of c_k * Y_k over a list of (c_k, Y_k)."""
    terms = [(Q(c), Y) for c, Y in terms]
    if not terms:
        raise ValueError("empty combination")
    funcs = [Y for _, Y in terms]
    _same_domain(funcs)
    grid = common_grid(funcs)
    cells = _pieces_on_grid(funcs, grid)
    slopes, ints = [], []
    for row in cells:
        s = Q(0)
        c = Q(0)
        for (a, Y), i in zip(terms, row):
            s += a * Y.slopes[i]
            c += a * Y.intercepts[i]
        slopes.append(s)
        ints.append(c)
    return PiecewiseAffine(grid, slopes, ints, check=False)


def _envelope(Y, Z, upper: bool) -> PiecewiseAffine:
    _same_domain([Y, Z])
    grid = common_grid([Y, Z])
    cells = _pieces_on_grid([Y, Z], grid)
    bs, ss, cs = [grid[0]], [], []
    for (g0, g1), (i, j) in zip(zip(grid, grid[1:]), cells):
        s1, c1, s2, c2 = Y.slopes[i], Y.intercepts[i], Z.slopes[j], Z.intercepts[j]
        cuts = [g0]
        if s1 != s2:
            xc = (c2 - c1) / (s1 - s2)
            if g0 < xc < g1:
                cuts.append(xc)
        cuts.append(g1)
        for a, b in zip(cuts, cuts[1:]):
            mid = (a + b) / 2
            first = s1 * mid + c1 >= s2 * mid + c2
            take1 = first if upper else not first
            ss.append(s1 if take1 else s2)
            cs.append(c1 if take1 else c2)
            bs.append(b)
    return PiecewiseAffine(bs, ss, cs, check=False)


def upper(Y, Z) -> PiecewiseAffine:
    return _envelope(Y, Z, True)


def lower(Y, Z) -> PiecewiseAffine:
    return _envelope(Y, Z, False)


def concatenate(Y, Z, mode: str = "upper") -> PiecewiseAffine:
    if mode not in ("upper", "lower"):
        raise ValueError("mode is 'upper' or 'lower'")
    return _envelope(Y, Z, mode == "upper")


@dataclass(frozen=True)
class CrossingPoint:
    x: Rational
    value: Rational
    transversal: bool
    left_function: object = None
    right_function: object = None


def intersections(Y, Z, left_ref=None, right_ref=None):
    """Isolated equality points of Y and Z, plus maximal intervals where they coincide.

    Returns (crossings, overlaps). A crossing is transversal when Y - Z changes sign there.
    """
    D = Y - Z
    pts = []
    overlaps = []
    bs, ss, cs = D.breaks, D.slopes, D.intercepts
    k = len(ss)
    for i in range(k):
        a, b = bs[i], bs[i + 1]
        if ss[i] == 0 and cs[i] == 0:
            if overlaps and overlaps[-1][1] == a:
                overlaps[-1] = (overlaps[-1][0], b)
            else:
                overlaps.append((a, b))
            continue
        if ss[i] != 0:
            xc = -cs[i] / ss[i]
            if a <= xc <= b:
                pts.append(xc)
        elif cs[i] == 0:
            pass
    seen = set()
    out = []
    for x in pts:
        if x in seen or any(lo <= x <= hi for lo, hi in overlaps):
            continue
        seen.add(x)
        sl = D.slope_at(x, "left") if x > D.lo else None
        sr = D.slope_at(x, "right") if x < D.hi else None
        # sign of D just left is -sign(sl), just right is sign(sr)
        trans = sl is not None and sr is not None and sl != 0 and sr != 0 and (sl > 0) == (sr > 0)
        out.append(CrossingPoint(x, Y(x), trans, left_ref, right_ref))
    out.sort(key=lambda c: c.x)
    return out, overlaps


def equality_intervals(Y, Z):
    """Maximal closed intervals (of positive length) on which Y == Z."""
    return intersections(Y, Z)[1]


# bundles

class Bundle:
    """Finite multiset of PiecewiseAffine functions on a common domain.

    Members are kept in generation order so that index k (1-based) names Y_k.
    """

    def __init__(self, functions: Sequence[PiecewiseAffine]):
        functions = list(functions)
        if not functions:
            raise ValueError("empty bundle")
        self.domain = _same_domain(functions)
        self.functions = functions

    @classmethod
    def of_lines(cls, lo, hi, lines) -> Bundle:
        """Bundle of affine functions given as (slope, intercept) pairs or constants."""
        fs = []
        for ln in lines:
            if isinstance(ln, PiecewiseAffine):
                fs.append(ln.restrict(lo, hi) if ln.domain != (Q(lo), Q(hi)) else ln)
            elif isinstance(ln, tuple):
                fs.append(PiecewiseAffine.affine(lo, hi, ln[0], ln[1]))
            else:
                fs.append(PiecewiseAffine.constant(lo, hi, ln))
        return cls(fs)

    def __len__(self):
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)

    def __getitem__(self, k):
        return self.functions[k]

    def values(self, x) -> list:
        return [f(x) for f in self.functions]

    def multiplicity(self, Y) -> int:
        return sum(1 for f in self.functions if f == Y)

    def restrict(self, lo, hi) -> Bundle:
        return Bundle([f.restrict(lo, hi) for f in self.functions])

    def reflect(self, p) -> Bundle:
        return Bundle([f.reflect(p) for f in self.functions])

    def map_values(self, a, b) -> Bundle:
        return Bundle([f.map_values(a, b) for f in self.functions])

    def to_dict(self) -> dict:
        return {"domain": [fmt(v) for v in self.domain], "functions": [f.to_dict() for f in self.functions]}


def _members(B):
    return B.functions if isinstance(B, Bundle) else list(B)


def order_levels(funcs, ranks, with_owners: bool = False):
    """Pointwise rank statistics of a list of functions.

    For each rank r in `ranks` (0-based, ascending order) returns the function x -> r-th smallest of
    the values; with owners, also a list of (lo, hi, member index) runs for each rank.
    """
    funcs = list(funcs)
    n = len(funcs)
    lo, hi = _same_domain(funcs)
    for r in ranks:
        if not 0 <= r < n:
            raise ValueError("rank out of range")
    grid = common_grid(funcs)
    cells = _pieces_on_grid(funcs, grid)
    outs = [([lo], [], [], []) for _ in ranks]
    idx = range(n)
    for (g0, g1), row in zip(zip(grid, grid[1:]), cells):
        S = [funcs[k].slopes[row[k]] for k in idx]
        C = [funcs[k].intercepts[row[k]] for k in idx]
        x = g0
        while True:
            vals = [S[k] * x + C[k] for k in idx]
            order = sorted(idx, key=lambda k: (vals[k], S[k]))
            chosen = [order[r] for r in ranks]
            nxt = g1
            for f in set(chosen):
                sf, vf = S[f], vals[f]
                for k in idx:
                    ds = sf - S[k]
                    if ds != 0:
                        # crossing where vf + sf*(t-x) = vals[k] + S[k]*(t-x)
                        t = x + (vals[k] - vf) / ds
                        if x < t < nxt:
                            nxt = t
            for out, f in zip(outs, chosen):
                bs, ss, cs, ow = out
                ss.append(S[f])
                cs.append(C[f])
                bs.append(nxt)
                ow.append(f)
            if nxt == g1:
                break
            x = nxt
    result = []
    for bs, ss, cs, ow in outs:
        Y = PiecewiseAffine(bs, ss, cs, check=False)
        if with_owners:
            runs = []
            for a, b, f in zip(bs, bs[1:], ow):
                if runs and runs[-1][2] == f and runs[-1][1] == a:
                    runs[-1] = (runs[-1][0], b, f)
                else:
                    runs.append((a, b, f))
            result.append((Y, runs))
        else:
            result.append(Y)
    return result


def bundle_median(B) -> PiecewiseAffine:
    funcs = _members(B)
    n = len(funcs)
    if n == 0:
        raise ValueError("empty bundle")
    if n % 2:
        return order_levels(funcs, [n // 2])[0]
    a, b = order_levels(funcs, [n // 2 - 1, n // 2])
    return affine_combine([(Q(1, 2), a), (Q(1, 2), b)])


def bundle_sum(B) -> PiecewiseAffine:
    return affine_combine([(1, f) for f in _members(B)])


def bundle_mean(B) -> PiecewiseAffine:
    funcs = _members(B)
    if not funcs:
        raise ValueError("empty bundle")
    return bundle_sum(funcs).scale(Q(1, len(funcs)))


def mmm_image(B) -> PiecewiseAffine:
    """|B| (median - mean) + median, i.e. (n+1) median - sum."""
    funcs = _members(B)
    n = len(funcs)
    return affine_combine([(n + 1, bundle_median(funcs)), (-1, bundle_sum(funcs))])
