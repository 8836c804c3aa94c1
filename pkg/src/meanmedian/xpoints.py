"""X-points: detection, local classification, triad symmetries and the one-sided local theory.

Everything local is computed from germs: the value at p together with the one-sided slope. The
mean-median map acts on germs exactly as on functions (medians of germs are taken in
lexicographic order), so classification at p never needs a neighbourhood radius.

One-sided analyses run in a normalised frame: the left side is mirrored onto the right by
x -> 2p - x, and values are negated when the median sequence is non-increasing there.
"""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass, field
from typing import Optional

from .numeric import AffineMap, Mobius, Q, Rational, fmt
from .orbit import iterate_until_stable
from .pwa import Bundle, PiecewiseAffine, intersections, order_levels
from .dynamics import FunctionalOrbit, stabilization_map

SIDES = ("left", "right")
ORBIT_CAP = 10_000


class PreconditionError(ValueError):
    """A hypothesis of a theorem-backed procedure does not hold."""


# germs

def _germ_median(s):
    n = len(s)
    h = n // 2
    if n % 2:
        return s[h]
    a, b = s[h - 1], s[h]
    return ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)


def germ_orbit(germs, n_max: int):
    """Germs (value, slope) of Y_1..Y_{n_max} just right of a point, and the median germs M_n."""
    ys = [(Q(v), Q(s)) for v, s in germs]
    n0 = len(ys)
    srt = sorted(ys)
    meds = {n0: _germ_median(srt)}
    tot = (sum((g[0] for g in ys), Q(0)), sum((g[1] for g in ys), Q(0)))
    while len(ys) < n_max:
        n = len(ys)
        M = meds[n]
        if n == n0:
            y = ((n + 1) * M[0] - tot[0], (n + 1) * M[1] - tot[1])
        else:
            P = meds[n - 1]
            y = ((n + 1) * M[0] - n * P[0], (n + 1) * M[1] - n * P[1])
        ys.append(y)
        insort(srt, y)
        meds[n + 1] = _germ_median(srt)
    return ys, meds


def side_germs(B: Bundle, p, side: str):
    """Frame germs of the initial functions: right slopes, or negated left slopes."""
    p = Q(p)
    lo, hi = B.domain
    if side == "right":
        if not p < hi:
            return None
        return [(f(p), f.slope_at(p, "right")) for f in B]
    if not lo < p:
        return None
    return [(f(p), -f.slope_at(p, "left")) for f in B]


def _trend(meds, n0, n_max):
    up = down = True
    for n in range(n0, n_max):
        a, b = meds[n], meds[n + 1]
        if b < a:
            up = False
        if b > a:
            down = False
    if up and down:
        return "constant"
    return "up" if up else ("down" if down else None)


# frames

@dataclass(frozen=True)
class SideFrame:
    p: Rational
    side: str
    sign: int = 1

    def x_out(self, x):
        """Frame abscissa to original (the map is an involution, so it also goes the other way)."""
        return Q(x) if self.side == "right" else 2 * self.p - Q(x)

    def y_out(self, y):
        return self.sign * Q(y)

    def line_out(self, slope, intercept):
        s, c = Q(slope), Q(intercept)
        if self.side == "left":
            s, c = -s, c + 2 * self.p * s
        return self.sign * s, self.sign * c

    def interval_out(self, a, b):
        u, v = self.x_out(a), self.x_out(b)
        return (u, v) if u <= v else (v, u)

    def reach(self, B: Bundle):
        lo, hi = B.domain
        return hi - self.p if self.side == "right" else self.p - lo

    def bundle(self, B: Bundle, width) -> Bundle:
        p = self.p
        if self.side == "right":
            W = B.restrict(p, p + width)
        else:
            W = B.restrict(p - width, p).reflect(p)
        return W if self.sign > 0 else W.map_values(-1, 0)


# records

@dataclass
class Tractability:
    ok: bool
    side: str
    index: Optional[int] = None
    p_star: Optional[Rational] = None        # original coordinates
    domain: Optional[tuple] = None           # original coordinates, open interval
    reason: str = ""
    attempts: list = field(default_factory=list)

    def to_dict(self):
        return {"ok": self.ok, "side": self.side, "index": self.index,
                "p_star": None if self.p_star is None else fmt(self.p_star),
                "domain": None if self.domain is None else [fmt(v) for v in self.domain],
                "reason": self.reason}


@dataclass
class XPointRecord:
    p: Rational
    pair: Optional[tuple]
    value: Optional[Rational] = None
    pairs: list = field(default_factory=list)
    regular: Optional[bool] = None
    monotonic: Optional[str] = None
    proper: Optional[bool] = None
    active: Optional[bool] = None
    stabilising: Optional[bool] = None
    tau: Optional[int] = None
    m_at_p: Optional[Rational] = None
    y_set: Optional[list] = None
    standard_auxiliary: Optional[int] = None
    aux_by_side: dict = field(default_factory=dict)
    left_rank: Optional[int] = None
    right_rank: Optional[int] = None
    symmetry: Optional[object] = None
    tractability: dict = field(default_factory=dict)
    neighborhood: Optional[tuple] = None
    note: str = ""
    germs: Optional[list] = field(default=None, repr=False)   # (value, right slope, left slope) per Y_k

    @property
    def rank(self):
        return self.left_rank if self.left_rank == self.right_rank else None

    def to_dict(self) -> dict:
        r = lambda v: None if v is None else fmt(v)
        return {
            "p": fmt(self.p), "pair": list(self.pair) if self.pair else None, "value": r(self.value),
            "pairs": [list(q) for q in self.pairs], "regular": self.regular, "monotonic": self.monotonic,
            "proper": self.proper, "active": self.active, "stabilising": self.stabilising,
            "tau": self.tau, "m_at_p": r(self.m_at_p), "y_set": self.y_set,
            "standard_auxiliary": self.standard_auxiliary, "left_rank": self.left_rank,
            "right_rank": self.right_rank,
            "symmetry": None if self.symmetry is None else self.symmetry.to_dict(),
            "tractability": {s: t.to_dict() for s, t in self.tractability.items()},
            "neighborhood": None if self.neighborhood is None else [fmt(v) for v in self.neighborhood],
            "note": self.note,
        }

    def atlas_row(self) -> list:
        flags = "".join(c for c, on in (("R", self.regular), ("P", self.proper), ("A", self.active)) if on)
        lo, hi = self.neighborhood if self.neighborhood else ("", "")
        return [fmt(self.p), self.tau if self.tau is not None else "",
                fmt(self.m_at_p) if self.m_at_p is not None else "",
                self.left_rank or "", self.right_rank or "", flags,
                fmt(lo) if lo != "" else "", fmt(hi) if hi != "" else ""]


# geometric stage

def find_xpoints(B, interval=None) -> list:
    """Every transversal pairwise crossing strictly inside the interval, one record per (x, value)."""
    funcs = list(B.functions if isinstance(B, Bundle) else B)
    if interval is not None:
        funcs = [f.restrict(*interval) for f in funcs]
    found = {}
    for i in range(len(funcs)):
        for j in range(i + 1, len(funcs)):
            if funcs[i] == funcs[j]:
                continue
            for c in intersections(funcs[i], funcs[j])[0]:
                if c.transversal:
                    found.setdefault((c.x, c.value), []).append((i + 1, j + 1))
    out = [XPointRecord(p=x, pair=prs[0], value=v, pairs=prs) for (x, v), prs in found.items()]
    out.sort(key=lambda r: (r.p, r.value))
    return out


def _transversal_pairs(germs, upto):
    pairs = []
    for i in range(upto):
        vi, ri, li = germs[i]
        for j in range(i + 1, upto):
            vj, rj, lj = germs[j]
            if vi == vj and (ri - rj) * (li - lj) > 0:
                pairs.append((i + 1, j + 1))
    return pairs


def two_sided_germs(B: Bundle, p, n_max: int):
    """(value, right slope, left slope) of Y_1..Y_{n_max} at p, plus the one-sided median germs."""
    out = {}
    for side in SIDES:
        g = side_germs(B, p, side)
        out[side] = germ_orbit(g, n_max) if g is not None else None
    gR = out["right"][0] if out["right"] else None
    gL = out["left"][0] if out["left"] else None
    germs = []
    for k in range(n_max):
        v = gR[k][0] if gR else gL[k][0]
        germs.append((v, gR[k][1] if gR else None, -gL[k][1] if gL else None))
    return germs, out


def is_xpoint(B: Bundle, p, cap: int = ORBIT_CAP):
    """True when two members of Xi_{tau(p)-1} (or Xi_{tau(p)}) cross transversally at p; None past the cap."""
    p = Q(p)
    r = iterate_until_stable(B.values(p), cap)
    if not r.stabilized:
        return None
    n = max(r.transit_time - 1, len(B))
    germs, _ = two_sided_germs(B, p, max(n, r.transit_time))
    if any(g[1] is None or g[2] is None for g in germs):
        return False
    return bool(_transversal_pairs(germs, r.transit_time - 1) or _transversal_pairs(germs, r.transit_time))


def classify_xpoint(B: Bundle, p, pair=None, horizon: int = 12, cap: int = ORBIT_CAP) -> XPointRecord:
    """Fill in the taxonomy of p from the germs of Xi_{tau(p)-1}; `B` is the initial bundle."""
    p = Q(p)
    rec = XPointRecord(p=p, pair=tuple(pair) if pair else None)
    r = iterate_until_stable(B.values(p), cap)
    rec.stabilising = r.stabilized
    if not r.stabilized:
        rec.note = "unclassifiable: cap exceeded"
        return rec
    tau, m = r.transit_time, r.limit
    rec.tau, rec.m_at_p = tau, m
    n0 = len(B)
    upto = tau - 1
    n_max = max(upto, n0) + horizon
    germs, side = two_sided_germs(B, p, n_max)
    rec.germs = germs
    if side["right"] is None or side["left"] is None:
        rec.note = "endpoint of the domain"
        return rec
    pairs = _transversal_pairs(germs, upto)
    if not pairs:
        # the crossing may be created by the element that stabilises the orbit (1/2 in [0,x,1])
        pairs = _transversal_pairs(germs, tau)
        if pairs:
            rec.note = "pair completed at the stabilization step"
    if pair is not None and tuple(pair) not in pairs and tuple(reversed(pair)) not in pairs:
        pairs = pairs + [tuple(sorted(pair))]
    rec.pairs = pairs
    if not pairs:
        rec.note = "not an X-point of the bundle at its stabilization time"
        return rec

    trends = {s: _trend(side[s][1], n0, n_max) for s in SIDES}
    if all(t in ("up", "constant") for t in trends.values()):
        rec.monotonic = "nondecreasing"
    elif all(t in ("down", "constant") for t in trends.values()):
        rec.monotonic = "nonincreasing"
    else:
        rec.monotonic = "reversing"
    sign = -1 if rec.monotonic == "nonincreasing" else 1

    if rec.pair is None:
        below = [q for q in pairs if sign * germs[q[0] - 1][0] <= sign * m]
        at_m = [q for q in pairs if germs[q[0] - 1][0] == m]
        if at_m:
            rec.pair = at_m[0]
        elif below:
            rec.pair = max(below, key=lambda q: sign * germs[q[0] - 1][0])
        else:
            rec.pair = pairs[0]
    i, j = rec.pair
    rec.value = germs[i - 1][0]
    rec.regular = all(germs[k - 1][1] == germs[k - 1][2] for k in (i, j))

    cls = lambda k: germs[k - 1]
    classes = {frozenset((cls(a), cls(b))) for a, b in pairs if cls(a) != cls(b)}
    mult = lambda k: sum(1 for t in range(upto) if germs[t] == cls(k))
    rec.proper = len(classes) == 1 and mult(i) == 1 and mult(j) == 1

    if rec.monotonic == "reversing":
        rec.active = False
        rec.note = "not monotonic: the set of functions immediately above is undefined"
        return rec
    h = sign * rec.value
    above = [sign * germs[t][0] for t in range(upto) if sign * germs[t][0] > h]
    ys = []
    if above:
        nxt = min(above)
        if h <= sign * m < nxt:
            seen = set()
            for t in range(upto):
                if sign * germs[t][0] == nxt and germs[t] not in seen:
                    seen.add(germs[t])
                    ys.append(t + 1)
    rec.y_set = ys
    rec.active = bool(ys)
    if not ys:
        return rec
    for s in SIDES:
        g = side[s][0]
        fg = lambda k: (sign * g[k - 1][0], sign * g[k - 1][1])
        best = min(ys, key=lambda k: (fg(k), k))
        rec.aux_by_side[s] = best
        rank = sum(1 for t in range(1, upto + 1) if fg(t) == fg(best))
        if s == "left":
            rec.left_rank = rank
        else:
            rec.right_rank = rank
    rec.standard_auxiliary = rec.aux_by_side["right"]
    return rec


def analyze_point(B: Bundle, p, **kw) -> XPointRecord:
    return classify_xpoint(B, p, **kw)


def standard_auxiliary(rec: XPointRecord, side: Optional[str] = None) -> int:
    """Index of min Y_p (per side when the two one-sided minima differ)."""
    if not rec.active:
        raise PreconditionError("X-point is not active")
    return rec.aux_by_side[side] if side else rec.standard_auxiliary


# symmetries

def _line(slope, intercept):
    return AffineMap(Q(slope), Q(intercept))


def _minus(A: AffineMap, B: AffineMap) -> AffineMap:
    return AffineMap(A.slope - B.slope, A.intercept - B.intercept)


def _ratio(num: AffineMap, den: AffineMap) -> Mobius:
    return Mobius(num.slope, num.intercept, den.slope, den.intercept)


@dataclass
class Symmetry:
    """Self-equivalence (mu, f): f_x(Omega(x)) = Omega(mu(x)), with f_x affine in z."""

    mu: Mobius
    lines: tuple        # (I, J, K, I', J', K') as AffineMaps of x
    kind: str = "triad"

    def f(self, x) -> AffineMap:
        x = Q(x)
        I, J, K, I2, J2, K2 = self.lines
        y = self.mu(x)
        d = K(x) - I(x)
        return AffineMap((K2(y) - I2(y)) / d, (K(x) * I2(y) - I(x) * K2(y)) / d)

    def inverse(self) -> Symmetry:
        I, J, K, I2, J2, K2 = self.lines
        return Symmetry(self.mu.inverse(), (I2, J2, K2, I, J, K), self.kind)

    def holds_at(self, x) -> bool:
        x = Q(x)
        I, J, K, I2, J2, K2 = self.lines
        fx, y = self.f(x), self.mu(x)
        return sorted(fx(L(x)) for L in (I, J, K)) == sorted(L(y) for L in (I2, J2, K2))

    def to_dict(self):
        return {"kind": self.kind, "mu": [fmt(v) for v in (self.mu.a, self.mu.b, self.mu.c, self.mu.d)]}


def symmetry(I, J, K, I2, J2, K2, kind: str = "triad") -> Symmetry:
    """Mobius part (K'-I')/(K'-J') inverted after (K-I)/(K-J); lines given as AffineMap or (slope, intercept)."""
    I, J, K, I2, J2, K2 = (L if isinstance(L, AffineMap) else _line(*L) for L in (I, J, K, I2, J2, K2))
    if kind not in ("triad", "pseudotriad"):
        raise ValueError("kind is 'triad' or 'pseudotriad'")
    if I.slope == J.slope or I2.slope == J2.slope:
        raise ValueError("degenerate triad: I and J must cross")
    p = (J.intercept - I.intercept) / (I.slope - J.slope)
    if I2(p) != I(p) or J2(p) != I(p):
        raise ValueError("I, J, I', J' must be concurrent")
    if K(p) == I(p) or K2(p) == I(p):
        raise ValueError("degenerate triad: auxiliary line passes through the X-point")
    same = (K(p) > I(p)) == (K2(p) > I(p))
    if same != (kind == "triad"):
        raise ValueError(f"auxiliary lines do not form a {kind}")
    mu = _ratio(_minus(K2, I2), _minus(K2, J2)).inverse().compose(_ratio(_minus(K, I), _minus(K, J)))
    return Symmetry(mu, (I, J, K, I2, J2, K2), kind)


def harmonic_symmetry(p, q, r):
    """Harmonic homology fixing p and q with centre (q, r); q=None gives the point reflection in (p, r)."""
    p, r = Q(p), Q(r)
    if q is None:
        return Mobius(-1, 2 * p, 0, 1), (lambda x: AffineMap(Q(-1), 2 * r))
    q = Q(q)
    if p == q:
        raise ValueError("p and q must differ")
    T, D = p + q, p * q
    mu = Mobius(T, -2 * D, 2, -T)

    def f(x):
        x = Q(x)
        y = mu(x)
        return AffineMap((y - q) / (x - q), (x - y) / (x - q) * r)

    return mu, f


def triad_lines(rec: XPointRecord, triad=None):
    """(I, J, K, I', J', K') for the triad [Y_i, Y_j; Y_k] at p, from the record's germs.

    k may be a pair (right, left) when the auxiliary function differs across p.
    """
    i, j, k = triad if triad else (rec.pair[0], rec.pair[1], rec.standard_auxiliary)
    kr, kl = k if isinstance(k, tuple) else (k, k)
    germs = rec.germs
    if max(i, j, kr, kl) > len(germs):
        raise ValueError("germs not computed that far")
    p = rec.p
    line = lambda v, s: AffineMap(s, v - s * p)
    (vi, ri, li), (vj, rj, lj) = germs[i - 1], germs[j - 1]
    vk, rk, lk = germs[kr - 1][0], germs[kr - 1][1], germs[kl - 1][2]
    vkl = germs[kl - 1][0]
    up_r, lo_r = ((vi, ri), (vj, rj)) if ri >= rj else ((vj, rj), (vi, ri))
    up_l, lo_l = ((vi, li), (vj, lj)) if li <= lj else ((vj, lj), (vi, li))
    return (line(*up_r), line(*lo_r), line(vk, rk), line(*up_l), line(*lo_l), line(vkl, lk))


def xpoint_symmetry(rec: XPointRecord, triad=None) -> Symmetry:
    I, J, K, I2, J2, K2 = triad_lines(rec, triad)
    kind = "triad" if rec.monotonic != "reversing" else "pseudotriad"
    return symmetry(I, J, K, I2, J2, K2, kind)


def affine_combination_coefficients(rec: XPointRecord, n: int, triad=None):
    """(alpha, beta, gamma) with Y_n = alpha U + beta L + gamma Y near p, or None."""
    I, J, K, I2, J2, K2 = triad_lines(rec, triad)
    v, r, l = rec.germs[n - 1]
    p = rec.p
    W, W2 = AffineMap(r, v - r * p), AffineMap(l, v - l * p)
    # unknowns alpha, beta with gamma = 1 - alpha - beta; equations on slopes and intercepts of both sides
    rows = []
    for A, Bm, C, T in ((I, J, K, W), (I2, J2, K2, W2)):
        rows.append((A.slope - C.slope, Bm.slope - C.slope, T.slope - C.slope))
        rows.append((A.intercept - C.intercept, Bm.intercept - C.intercept, T.intercept - C.intercept))
    sol = None
    for a in range(len(rows)):
        for b in range(a + 1, len(rows)):
            (a1, b1, c1), (a2, b2, c2) = rows[a], rows[b]
            det = a1 * b2 - a2 * b1
            if det != 0:
                sol = ((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det)
                break
        if sol:
            break
    if sol is None:
        return None
    al, be = sol
    if all(a1 * al + b1 * be == c1 for a1, b1, c1 in rows):
        return al, be, 1 - al - be
    return None


def _history(B: Bundle, x, n_max: int):
    r = iterate_until_stable(B.values(x), max(n_max, 1), keep_history=True)
    ys = list(B.values(x)) + list(r.history)
    if r.stabilized:
        while len(ys) < n_max:
            ys.append(r.limit)
    return ys, r


def _flat(triad):
    out = []
    for v in triad:
        out.extend(v if isinstance(v, tuple) else (v,))
    return out


def verify_inheritance(B: Bundle, rec: XPointRecord, samples, n_range, triad=None, pair=None) -> bool:
    """Check Y_n(mu(x)) = f_x(Y_n(x)) for n in n_range and tau(mu(x)) = tau(x) at every sample.

    `pair` = (mu, f) replaces the triad's own maps on the right of p (used as a negative control).
    """
    if triad is None and not (rec.proper and rec.active):
        raise PreconditionError("X-point must be proper and active for its standard triad")
    need = max(rec.tau, max(_flat(triad)) if triad else 0)
    if len(rec.germs) < need:
        rec.germs = two_sided_germs(B, rec.p, need + 1)[0]
    if affine_combination_coefficients(rec, rec.tau, triad) is None:
        raise PreconditionError(f"Y_{rec.tau} is not an affine combination of the triad functions")
    sym = xpoint_symmetry(rec, triad)
    inv = sym.inverse()
    lo, hi = n_range
    for x in samples:
        x = Q(x)
        # the triad's unprimed lines live right of p; left samples use the inverse pair
        s = sym if x > rec.p else inv
        if pair is not None and x > rec.p:
            y, fx = pair[0](x), pair[1](x)
        else:
            y, fx = s.mu(x), s.f(x)
        hx, rx = _history(B, x, hi)
        hy, ry = _history(B, y, hi)
        if rx.transit_time != ry.transit_time:
            return False
        for n in range(lo, hi + 1):
            if hy[n - 1] != fx(hx[n - 1]):
                return False
    return True


def local_radius(B: Bundle, p, n: int) -> Rational:
    """Distance from p to the nearest breakpoint or crossing of Xi_n away from p, or to the domain end."""
    p = Q(p)
    o = FunctionalOrbit(B).run(n, stop_when_stable=False)
    fs = o.functions[:n]
    lo, hi = B.domain
    best = min(d for d in (p - lo, hi - p) if d > 0)
    for f in fs:
        for b in f.interior_breaks():
            if b != p:
                best = min(best, abs(b - p))
    for a in range(len(fs)):
        for b in range(a + 1, len(fs)):
            for c in intersections(fs[a], fs[b])[0]:
                if c.x != p:
                    best = min(best, abs(c.x - p))
    return best


# one-sided analysis

def _first_break(f: PiecewiseAffine, x):
    for b in f.breaks[1:-1]:
        if b > x:
            return b
    return f.hi


def _first_meeting(Y: PiecewiseAffine, Z: PiecewiseAffine, x):
    cr, ov = intersections(Y, Z)
    pts = [c.x for c in cr if c.x > x] + [a for a, _ in ov if a > x]
    return min(pts) if pts else None


@dataclass
class Dichotomy:
    kind: str                          # "continuous", "discontinuous" or "unresolved"
    proven: bool
    p_infinity: Optional[Rational] = None       # original coordinates
    connector: Optional[tuple] = None           # (slope, intercept), original coordinates
    probes: list = field(default_factory=list)  # (x0, m(x0)) in original coordinates

    def to_dict(self):
        return {"kind": self.kind, "proven": self.proven,
                "p_infinity": None if self.p_infinity is None else fmt(self.p_infinity),
                "connector": None if self.connector is None else [fmt(v) for v in self.connector],
                "probes": [[fmt(a), fmt(b)] for a, b in self.probes]}


@dataclass
class AuxiliarySequence:
    side: str
    terms: list                  # (p_n, q_n, n), original coordinates
    distinct_xpoints: list       # original coordinates, in order of appearance
    stabilized: bool
    limit_p_infinity: Optional[Rational] = None
    transit_times: list = field(default_factory=list)
    cases: list = field(default_factory=list)       # flow-chart case (1..6) taken at each step n >= index
    y_star: Optional[tuple] = None                  # stabilised line (slope, intercept), original coords
    stabilized_at: Optional[int] = None

    def to_dict(self):
        return {"side": self.side,
                "terms": [[fmt(a), fmt(b), n] for a, b, n in self.terms],
                "distinct_xpoints": [fmt(v) for v in self.distinct_xpoints],
                "transit_times": self.transit_times, "stabilized": self.stabilized,
                "limit_p_infinity": None if self.limit_p_infinity is None else fmt(self.limit_p_infinity),
                "y_star": None if self.y_star is None else [fmt(v) for v in self.y_star]}


@dataclass
class Rank1Result:
    side: str
    p3: Rational                 # third-to-last distinct term
    p2: Rational                 # second-to-last
    p1: Rational                 # last
    y_star: tuple
    p_prime: Optional[Rational]
    conditions: dict             # "i", "ii", "iii" -> bool
    witnesses: dict
    dichotomies: dict            # "inner" (towards p) and "outer" -> Dichotomy
    branches: list               # (lo, hi, slope, intercept), original coordinates, sorted
    bound: Optional[Rational] = None     # far end of the described region, original coordinates
    tractable: bool = True               # False when the sequence was started at a relaxed index

    def to_dict(self):
        return {"side": self.side, "tractable": self.tractable, "p3": fmt(self.p3), "p2": fmt(self.p2), "p1": fmt(self.p1),
                "y_star": [fmt(v) for v in self.y_star],
                "p_prime": None if self.p_prime is None else fmt(self.p_prime),
                "conditions": self.conditions,
                "dichotomies": {k: d.to_dict() for k, d in self.dichotomies.items()},
                "branches": [[fmt(v) for v in b] for b in self.branches]}


class SideAnalysis:
    """Local theory on one side of an active monotonic X-point, in the normalised frame."""

    def __init__(self, B: Bundle, rec: XPointRecord, side: str, cap: int = ORBIT_CAP):
        if not rec.active:
            raise PreconditionError("X-point is not active")
        if side not in SIDES:
            raise ValueError("side is 'left' or 'right'")
        self.B = B
        self.rec = rec
        self.side = side
        self.cap = cap
        self.frame = SideFrame(rec.p, side, -1 if rec.monotonic == "nonincreasing" else 1)
        self.p = rec.p
        self.m = self.frame.sign * rec.m_at_p
        self.tau = rec.tau
        self.aux = rec.aux_by_side[side]
        self.reach = self.frame.reach(B)
        d = Q(rec.p.denominator)
        self.w0 = min(self.reach, 1 / (4 * d * d))
        self._orbits = {}
        self.tract = None
        self.sequence = None
        self.seq_orbit = None
        self.rank1 = None

    # helpers

    def orbit(self, w, n):
        o = self._orbits.get(w)
        if o is None:
            o = FunctionalOrbit(self.frame.bundle(self.B, w))
            self._orbits[w] = o
        o.run(n, stop_when_stable=True)
        return o

    def m_at(self, x_frame):
        r = iterate_until_stable(self.B.values(self.frame.x_out(x_frame)), self.cap)
        return None if not r.stabilized else self.frame.sign * r.limit

    def tau_at(self, x_frame):
        return iterate_until_stable(self.B.values(self.frame.x_out(x_frame)), self.cap).transit_time

    # tractability

    def check_index(self, ell: int) -> dict:
        """Evaluate T1, T2, T3 for one candidate index (frame witnesses mapped back to original x)."""
        p, w = self.p, self.w0
        while True:
            o = self.orbit(w, ell)
            M, Y = o.M(ell), o.Y(self.aux)
            meet = _first_meeting(M, Y, p)
            if meet is not None or w >= self.reach:
                break
            w = min(2 * w, self.reach)
        res = {"index": ell, "T1": False, "T2": None, "T3": None, "p_star": None, "witness": {}}
        if meet is None:
            res["witness"]["T1"] = "median does not meet the auxiliary function"
            return res
        res["p_star"] = self.frame.x_out(meet)
        res["_meet"] = meet
        bad = [b for f in (M, Y) for b in f.interior_breaks() if p < b < meet]
        res["T1"] = not bad
        if bad:
            res["witness"]["T1"] = ("corner", self.frame.x_out(min(bad)))
        t2 = None
        for k in range(1, self.tau):
            Z = o.Y(k)
            if Z == Y:
                continue
            for c in intersections(Y, Z)[0]:
                if c.transversal and p < c.x < meet and (t2 is None or c.x < t2[0]):
                    t2 = (c.x, k)
        res["T2"] = t2 is None
        if t2:
            res["witness"]["T2"] = (self.frame.x_out(t2[0]), (self.aux, t2[1]))
        t3 = None
        for n in range(self.tau, ell + 1):
            Z = o.Y(n)
            for b in Z.interior_breaks():
                if p < b < meet and Z(b) < Y(b) and (t3 is None or b < t3[0]):
                    t3 = (b, Z(b), n)
        res["T3"] = t3 is None
        if t3:
            res["witness"]["T3"] = (self.frame.x_out(t3[0]), self.frame.y_out(t3[1]), t3[2])
        return res

    def tractability(self, ell_max: Optional[int] = None, index: Optional[int] = None) -> Tractability:
        """Least odd index >= tau satisfying T1-T3, or only the given `index` when one is supplied."""
        first = self.tau if self.tau % 2 else self.tau + 1
        if index is not None:
            if index % 2 == 0 or index < self.tau:
                raise ValueError("tractability index must be odd and at least the transit time")
            first = ell_max = index
        ell_max = ell_max if ell_max is not None else first + 20
        attempts = []
        for ell in range(first, ell_max + 1, 2):
            res = self.check_index(ell)
            attempts.append(res)
            if res["T1"] and res["T2"] and res["T3"]:
                dom = self.frame.interval_out(self.p, res["_meet"])
                self.tract = Tractability(True, self.side, ell, res["p_star"], dom, "", attempts)
                self.rec.tractability[self.side] = self.tract
                return self.tract
        first_fail = attempts[0]
        reason = next(t for t in ("T1", "T2", "T3") if not first_fail[t])
        if all(not a["T1"] for a in attempts):
            reason = "T1"
        self.tract = Tractability(False, self.side, None, None, None,
                                  f"{reason} fails for every index up to {ell_max}", attempts)
        self.rec.tractability[self.side] = self.tract
        return self.tract

    # auxiliary sequence

    def _require_tractable(self, relaxed: bool = False):
        """Tractability data for the flow chart.

        With `relaxed`, an untractable side still yields a start: the least index whose median
        meets the auxiliary function.
        """
        if self.tract is None:
            self.tractability()
        if self.tract.ok:
            return self.tract.index, self.tract.p_star
        if relaxed:
            for a in self.tract.attempts:
                if a["p_star"] is not None:
                    return a["index"], a["p_star"]
        raise PreconditionError(f"not {self.side}-tractable: {self.tract.reason}")

    def auxiliary_sequence(self, n_max: int = 300, relaxed: bool = False) -> AuxiliarySequence:
        ell, p_star = self._require_tractable(relaxed)
        p, m = self.p, self.m
        p_star = self.frame.x_out(p_star)
        o = FunctionalOrbit(self.frame.bundle(self.B, p_star - p)).run(ell, stop_when_stable=False)
        slope_l = o.M(ell).slope_at(p)
        terms, distinct, cases = [], [], []
        stab_at = None
        n = ell
        while True:
            fs = o.functions
            through = [f for f in fs if f(p) == m and f.slope_at(p) >= slope_l]
            pn = min((_first_break(f, p) for f in through), default=o.domain[1])
            if n == ell:
                qn = p_star
            else:
                h = n // 2
                ranks = [h - 1, h] if n % 2 == 0 else [h - 1, h, h + 1]
                qn = min(_first_break(f, p) for f in order_levels(fs, ranks))
            terms.append((pn, qn, n))
            if not distinct or pn != distinct[-1]:
                distinct.append(pn)
                if len(distinct) >= 3 and distinct[-3] < o.domain[1]:
                    o.restrict(p, distinct[-3])
            if stab_at is not None and n >= stab_at + 2:
                break
            if n >= n_max:
                break
            # flow-chart case from the germs of the core at p
            germs = sorted((f(p), f.slope_at(p)) for f in fs)
            h = n // 2
            o.step()
            new = (o.functions[-1](p), o.functions[-1].slope_at(p))
            if n % 2 == 0:
                a, b = germs[h - 1], germs[h]
                case = 1 if a == b else 2
            else:
                a, b, c = germs[h - 1], germs[h], germs[h + 1]
                case = 3 if b == c else (4 if a == b else (5 if new < c else 6))
            cases.append(case)
            if case in (1, 3, 4) and stab_at is None:
                stab_at = n
            n += 1
        self.seq_orbit = o
        stabilized = stab_at is not None
        taus = [self.tau_at(x) for x in distinct]
        y_star = None
        if stabilized:
            M = o.M(o.n)
            s = M.slope_at(p)
            y_star = self.frame.line_out(s, m - s * p)
            self._y_star_frame = (s, m - s * p)
        seq = AuxiliarySequence(
            self.side, [(self.frame.x_out(a), self.frame.x_out(b), k) for a, b, k in terms],
            [self.frame.x_out(x) for x in distinct], stabilized,
            self.frame.x_out(distinct[-1]) if stabilized else None, taus, cases, y_star, stab_at)
        self._distinct_frame = distinct
        self.sequence = seq
        return seq

    # dichotomies

    def resolve(self, base, base_m, aux_line, end, probe=None, retries: int = 8) -> Dichotomy:
        """Decide the dichotomy at `base` (frame) between base and `end` with the given auxiliary line."""
        a, b = aux_line
        g = end - base
        x0 = Q(probe) if probe is not None else base + g / 1000
        probes = []
        for _ in range(retries + 1):
            m0 = self.m_at(x0)
            if m0 is None:
                return Dichotomy("unresolved", False, probes=probes)
            probes.append((self.frame.x_out(x0), self.frame.y_out(m0)))
            if m0 != a * x0 + b:
                sc = (m0 - base_m) / (x0 - base)
                if sc == a:
                    return Dichotomy("unresolved", False, probes=probes)
                xi = (b - base_m + sc * base) / (sc - a)
                line = self.frame.line_out(sc, base_m - sc * base)
                return Dichotomy("continuous", True, self.frame.x_out(xi), line, probes)
            x0 = base + (x0 - base) / 10
        return Dichotomy("discontinuous", False, probes=probes)

    def resolve_dichotomy(self, probe=None) -> Dichotomy:
        """Rank at least 2: probe the tractability domain once (probe given in original coordinates)."""
        self._require_tractable()
        rank = self.rec.right_rank if self.side == "right" else self.rec.left_rank
        if rank < 2:
            raise PreconditionError("dichotomy needs rank at least 2 on this side")
        o = self.orbit(self.w0, self.tau)
        p_star = self.frame.x_out(self.tract.p_star)
        Y = self._orbits[max(self._orbits)].Y(self.aux)
        pc = Y.piece_on(self.p, p_star) or (Y.slope_at(self.p), Y(self.p) - Y.slope_at(self.p) * self.p)
        pr = None if probe is None else self.frame.x_out(Q(probe))
        return self.resolve(self.p, self.m, pc, p_star, pr)

    # rank 1

    def rank1_analysis(self, n_max: int = 300, relaxed: bool = False) -> Rank1Result:
        if self.sequence is None:
            self.auxiliary_sequence(n_max, relaxed)
        seq = self.sequence
        if not seq.stabilized:
            raise PreconditionError("hypothesis: auxiliary sequence does not stabilise within the cap")
        if len(self._distinct_frame) < 3:
            raise PreconditionError("hypothesis: last three distinct terms absent")
        p, o = self.p, self.seq_orbit
        t3, t2, t1 = self._distinct_frame[-3:]
        tau3, tau2 = seq.transit_times[-3], seq.transit_times[-2]
        s, c = self._y_star_frame
        lo, hi = o.domain
        Ystar = PiecewiseAffine.affine(lo, hi, s, c)
        Y = o.Y(self.aux)
        conds, wit = {}, {}
        pp = _first_meeting(o.Y(tau2), Ystar, t2)
        p_prime = pp if pp is not None and pp < t3 else None
        # i) no crossings among Xi_{tau-1} in (p, p3)
        pbar = None
        fs = [o.Y(k) for k in range(1, self.tau)]
        for a in range(len(fs)):
            for b in range(a + 1, len(fs)):
                if fs[a] == fs[b]:
                    continue
                for cp in intersections(fs[a], fs[b])[0]:
                    if cp.transversal and p < cp.x < t3 and (pbar is None or cp.x < pbar):
                        pbar = cp.x
        conds["i"] = pbar is None
        if pbar is not None:
            wit["i"] = self.frame.x_out(pbar)
        # ii) every other member is below Y at p2 or above Y* at p'
        offenders = []
        if p_prime is not None:
            for k in range(1, self.tau):
                Z = o.Y(k)
                if Z == Y:
                    continue
                if not (Z(t2) < Y(t2) or Z(p_prime) > Ystar(p_prime)):
                    offenders.append(k)
        conds["ii"] = p_prime is not None and not offenders
        wit["ii"] = offenders
        # iii) Y_{tau(p3)} meets Y* in (p2, p3) only beyond p'
        conds["iii"] = False
        if p_prime is not None:
            cr = [x for x in _crossing_xs(o.Y(tau3), Ystar) if t2 < x < t3]
            conds["iii"] = bool(cr) and min(cr) > p_prime
            wit["iii"] = [self.frame.x_out(x) for x in cr]
        dich = {}
        m2 = self.m_at(t2)
        # the inner probe is always taken; the ii) fallback needs the limit below p2
        dich["inner"] = self.resolve(t2, m2, (s, c), t1)
        if conds["ii"] and conds["iii"]:
            dich["outer"] = self.resolve(t2, m2, (s, c), p_prime)
        branches, bound = [], None
        if conds["ii"] and dich["inner"].kind == "continuous":
            pl = self.frame.x_out(dich["inner"].p_infinity)
            cl = _frame_line(self.frame, dich["inner"].connector)
            pieces = [(p, pl, (s, c)), (pl, t2, cl)]
            bound = t2
            if "outer" in dich and dich["outer"].kind == "continuous":
                pr = self.frame.x_out(dich["outer"].p_infinity)
                cr_ = _frame_line(self.frame, dich["outer"].connector)
                pieces += [(t2, pr, cr_), (pr, p_prime, (s, c))]
                bound = p_prime
            for a_, b_, (sl, ic) in pieces:
                u, v = self.frame.interval_out(a_, b_)
                branches.append((u, v) + self.frame.line_out(sl, ic))
            branches.sort()
        self.rank1 = Rank1Result(self.side, self.frame.x_out(t3), self.frame.x_out(t2), self.frame.x_out(t1),
                           seq.y_star, None if p_prime is None else self.frame.x_out(p_prime), conds, wit,
                           dich, branches, None if bound is None else self.frame.x_out(bound),
                           bool(self.tract and self.tract.ok))
        return self.rank1

    def quasi_regularity_bound(self, n_max: int = 300):
        """Far end (original coordinates) of this side's part of U_p, with the case label.

        Only conditions i)-iii) are checked here, so the sequence may start at a relaxed index.
        """
        r = self.rank1_analysis(n_max, relaxed=True)
        c = r.conditions
        t2 = self._distinct_frame[-2]
        if c["i"] and c["ii"] and c["iii"]:
            return r.p_prime, "theorem", r
        if not c["ii"] and r.witnesses["ii"]:
            # takes precedence over i): the offender's meeting with the limit is the known bound
            x = self._offender_meets_limit(r.witnesses["ii"])
            if x is not None:
                return self.frame.x_out(x), "ii", r
        if not c["i"]:
            return r.witnesses["i"], "i", r
        if not c["ii"]:
            return None, "ii", r
        return self.frame.x_out(t2), "iii", r

    def _offender_meets_limit(self, offenders):
        """First point beyond p where an offending function meets the limit (Y*, then the inner connector)."""
        d = self.rank1.dichotomies.get("inner") if self.rank1 else None
        if d is None or d.kind != "continuous":
            return None
        s, c = self._y_star_frame
        pl = self.frame.x_out(d.p_infinity)
        cs, cc = _frame_line(self.frame, d.connector)
        t2 = self._distinct_frame[-2]
        o = self.seq_orbit
        best = None
        for k in offenders:
            Z = o.Y(k)
            for lo, hi, (a, b) in ((self.p, pl, (s, c)), (pl, t2, (cs, cc))):
                for x in _crossing_xs(Z.restrict(lo, hi), PiecewiseAffine.affine(lo, hi, a, b)):
                    if self.p < x <= hi and (best is None or x < best):
                        best = x
        return best


def _crossing_xs(Y, Z):
    cr, ov = intersections(Y, Z)
    return [c.x for c in cr] + [a for a, _ in ov]


def _frame_line(frame: SideFrame, line):
    """Inverse of SideFrame.line_out."""
    s, c = Q(line[0]) * frame.sign, Q(line[1]) * frame.sign
    if frame.side == "left":
        s, c = -s, c + 2 * frame.p * s
    return s, c


# whole-point procedures

def tractability(B: Bundle, rec: XPointRecord, side: str, ell_max: Optional[int] = None,
                 index: Optional[int] = None) -> Tractability:
    return SideAnalysis(B, rec, side).tractability(ell_max, index)


def auxiliary_sequence(B: Bundle, rec: XPointRecord, side: str, n_max: int = 300,
                       index: Optional[int] = None) -> AuxiliarySequence:
    sa = SideAnalysis(B, rec, side)
    if index is not None:
        sa.tractability(index=index)
    return sa.auxiliary_sequence(n_max)


def resolve_dichotomy(B: Bundle, rec: XPointRecord, side: str, probe=None) -> Dichotomy:
    return SideAnalysis(B, rec, side).resolve_dichotomy(probe)


def rank1_analysis(B: Bundle, rec: XPointRecord, sides=SIDES, n_max: int = 300, index=None) -> dict:
    """Per side Rank1Result. `index` optionally fixes the tractability index, as {side: ell}."""
    out = {}
    for s in sides:
        sa = SideAnalysis(B, rec, s)
        if index and s in index:
            sa.tractability(index=index[s])
        out[s] = sa.rank1_analysis(n_max)
    return out


def quasi_regularity_neighborhood(B: Bundle, rec: XPointRecord, sides=SIDES, n_max: int = 300):
    """U_p as (lo, hi), with per-side case labels ("theorem", "i", "ii", "iii" or a failure reason)."""
    ends, labels = {}, {}
    for s in sides:
        try:
            x, label, _ = SideAnalysis(B, rec, s).quasi_regularity_bound(n_max)
        except PreconditionError as e:
            x, label = None, str(e)
        ends[s], labels[s] = x, label
    lo = ends.get("left") if ends.get("left") is not None else rec.p
    hi = ends.get("right") if ends.get("right") is not None else rec.p
    rec.neighborhood = (lo, hi)
    return (lo, hi), labels


# census

@dataclass
class Census:
    t_max: int
    interval: tuple
    sets: dict                    # t -> sorted list of X-points
    records: dict                 # p -> XPointRecord
    skipped: list = field(default_factory=list)   # (p, reason)

    def counts(self) -> dict:
        return {t: len(v) for t, v in sorted(self.sets.items())}


def census(B: Bundle, t_max: int, interval=None, cap: int = ORBIT_CAP) -> Census:
    """Active X-points with transit time t, for odd t <= t_max, found among crossings of Xi_{t_max-2}."""
    if t_max < 5 or t_max % 2 == 0:
        raise ValueError("t_max must be odd and at least 5")
    W = B if interval is None else B.restrict(*interval)
    o = FunctionalOrbit(W).run(t_max - 2, stop_when_stable=False)
    cands = find_xpoints(o.functions[:t_max - 2])
    sets = {t: [] for t in range(5, t_max + 1, 2)}
    records, skipped = {}, []
    for c in cands:
        if c.p in records:
            continue
        r = iterate_until_stable(B.values(c.p), cap)
        if not r.stabilized:
            skipped.append((c.p, "cap exceeded"))
            continue
        t = r.transit_time
        if t > t_max or t % 2 == 0 or not any(max(q) <= t - 1 for q in c.pairs):
            continue
        rec = classify_xpoint(B, c.p, cap=cap)
        if not rec.active:
            skipped.append((c.p, "inactive"))
            continue
        records[c.p] = rec
        sets.setdefault(t, []).append(c.p)
    for t in sets:
        sets[t].sort()
    lo, hi = W.domain
    return Census(t_max, (lo, hi), sets, records, skipped)
