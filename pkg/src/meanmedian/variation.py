"""Variation of the limit function over Farey and dyadic partitions, the log-log slope, and P_n."""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .numeric import Q, Rational, fmt, parse_rational
from .orbit import iterate_until_stable
from .pwa import Bundle

log = logging.getLogger(__name__)

LO, HI = Q(1, 2), Q(2, 3)
POINT_CAP = 5_000


@dataclass
class Partition:
    kind: str                 # "farey" or "dyadic"
    size_param: int           # q or i
    points: list

    def __len__(self):
        return len(self.points)


def _successor(a: int, b: int, q: int):
    """Next fraction after a/b in the Farey sequence of order q."""
    # b*c - a*d = 1 with d <= q maximal
    inv = pow(a, -1, b) if b > 1 else 0
    d = (-inv) % b if b > 1 else 1
    d += ((q - d) // b) * b
    c = (1 + a * d) // b
    return c, d


def farey_partition(q: int, lo=LO, hi=HI) -> Partition:
    """Reduced fractions with denominator <= q in [lo, hi]; lo and hi must themselves have denominator <= q."""
    if q < 2:
        raise ValueError("q must be at least 2")
    lo, hi = Q(lo), Q(hi)
    if lo.denominator > q or hi.denominator > q:
        raise ValueError("endpoints must belong to the Farey sequence")
    a, b = int(lo.numerator), int(lo.denominator)
    pts = [lo]
    while Q(a, b) < hi:
        a, b = _successor(a, b, q)
        pts.append(Q(a, b))
    return Partition("farey", q, pts)


def dyadic_partition(i: int, lo=LO, hi=HI) -> Partition:
    """k/2^i inside [lo, hi] plus both endpoints."""
    if i < 1:
        raise ValueError("i must be positive")
    lo, hi = Q(lo), Q(hi)
    den = 1 << i
    k0 = math.ceil(lo * den)
    k1 = math.floor(hi * den)
    pts = {lo, hi} | {Q(k, den) for k in range(int(k0), int(k1) + 1)}
    return Partition("dyadic", i, sorted(pts))


# per-point evaluation with a disk cache

class LimitCache:
    """Exact limit and transit time per point; lines "x_num/x_den,m_num/m_den,tau". Unresolved points are not stored."""

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self.data = {}
        self._dirty = False
        if path and os.path.exists(path):
            with open(path) as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    x, m, tau = line.split(",")
                    self.data[parse_rational(x)] = (parse_rational(m), int(tau))

    def get(self, x):
        return self.data.get(x)

    def put(self, x, m, tau):
        self.data[x] = (m, tau)
        self._dirty = True

    def save(self):
        if not self.path or not self._dirty:
            return
        tmp = self.path + ".tmp"
        with open(tmp, "w") as fh:
            for x in sorted(self.data):
                m, tau = self.data[x]
                fh.write(f"{fmt(x)},{fmt(m)},{tau}\n")
        os.replace(tmp, self.path)
        self._dirty = False


def _evaluate(args):
    B, x, cap = args
    r = iterate_until_stable(B.values(x), cap)
    return x, r.limit, r.transit_time


def evaluate_points(B: Bundle, points, cap: int = POINT_CAP, cache: Optional[LimitCache] = None,
                    workers: int = 1) -> dict:
    """x -> (m, tau) or (None, None) when the cap is exceeded."""
    out = {}
    todo = []
    for x in points:
        hit = cache.get(x) if cache else None
        if hit is not None:
            out[x] = hit
        else:
            todo.append(x)
    if workers > 1 and len(todo) > 64:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_evaluate, [(B, x, cap) for x in todo], chunksize=256))
    else:
        results = [_evaluate((B, x, cap)) for x in todo]
    for x, m, tau in results:
        out[x] = (m, tau)
        if cache is not None and m is not None:
            cache.put(x, m, tau)
    return out


@dataclass
class VariationResult:
    size: int                 # partition size
    param: int                # q or i
    V: Rational
    resolved: int
    unresolved: list = field(default_factory=list)

    @property
    def coverage(self) -> float:
        return 100.0 * self.resolved / self.size if self.size else 100.0

    def csv_row(self):
        return [self.param, self.size, str(self.V.numerator), str(self.V.denominator),
                f"{self.coverage:.4f}"]


def variation(B: Bundle, partition: Partition, cap: int = POINT_CAP, cache: Optional[LimitCache] = None,
              workers: int = 1) -> VariationResult:
    """Sum of |m(x_i) - m(x_{i-1})| over consecutive resolved points."""
    vals = evaluate_points(B, partition.points, cap, cache, workers)
    V = Q(0)
    prev = None
    bad = []
    for x in partition.points:
        m = vals[x][0]
        if m is None:
            bad.append(x)
            continue
        if prev is not None:
            V += abs(m - prev)
        prev = m
    if bad:
        log.warning("%d of %d points unresolved within cap %d", len(bad), len(partition), cap)
    return VariationResult(len(partition), partition.size_param, V, len(partition) - len(bad), bad)


@dataclass
class VariationSeries:
    kind: str
    entries: list             # VariationResult per partition
    alpha: Optional[float] = None
    dimension_estimate: Optional[float] = None
    fit_range: Optional[tuple] = None

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha, "dimension": self.dimension_estimate,
                "fit_range": self.fit_range,
                "min_coverage_pct": min((e.coverage for e in self.entries), default=100.0)}


def slope_and_dimension(sizes, values, skip: int = 3):
    """Least-squares slope of log V against log size, dropping the `skip` smallest sizes."""
    pts = sorted((int(s), float(v)) for s, v in zip(sizes, values) if v > 0)
    pts = pts[skip:] if len(pts) - skip >= 2 else pts
    if len(pts) < 2:
        raise ValueError("need at least two positive entries")
    x = np.log([s for s, _ in pts])
    y = np.log([v for _, v in pts])
    if np.allclose(y, y[0]):
        return 0.0, 1.0
    alpha = float(np.polyfit(x, y, 1)[0])
    return alpha, 1.0 + alpha


def variation_series(B: Bundle, kind: str, params, cap: int = POINT_CAP,
                     cache: Optional[LimitCache] = None, workers: int = 1, skip: int = 3) -> VariationSeries:
    make = {"farey": farey_partition, "dyadic": dyadic_partition}[kind]
    params = sorted(params)
    # evaluate the finest partition once; coarser Farey partitions are subsets
    if kind == "farey":
        evaluate_points(B, make(params[-1]).points, cap, cache, workers)
    entries = [variation(B, make(k), cap, cache, workers) for k in params]
    if cache is not None:
        cache.save()
    series = VariationSeries(kind, entries)
    usable = [e for e in entries if e.V > 0]
    if len(usable) >= 4:
        series.alpha, series.dimension_estimate = slope_and_dimension(
            [e.size for e in usable], [e.V for e in usable], skip)
        series.fit_range = (usable[min(skip, len(usable) - 2)].param, usable[-1].param)
    return series


# proportion of X-points

def xpoint_proportion(B: Bundle, n_max: int, cap: int = POINT_CAP, lo=LO, hi=HI):
    """[(n, P_n, non-X-points with denominator n)] where P_n is exact over fractions with denominator <= n.

    B must extend past both ends of [lo, hi], since X-points need germs on both sides.
    """
    from .xpoints import is_xpoint
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    lo, hi = Q(lo), Q(hi)
    if not B.domain[0] < lo <= hi < B.domain[1]:
        raise ValueError("bundle domain must strictly contain the sampled interval")
    total = hits = 0
    rows = []
    for n in range(2, n_max + 1):
        misses = []
        for a in range(math.ceil(lo * n), math.floor(hi * n) + 1):
            if math.gcd(a, n) != 1:
                continue
            x = Q(a, n)
            total += 1
            ok = is_xpoint(B, x, cap)
            if ok is None:
                log.warning("cap exceeded at %s; counted as non-X-point", fmt(x))
            if ok:
                hits += 1
            else:
                misses.append(x)
        rows.append((n, Q(hits, total), misses))
    return rows
