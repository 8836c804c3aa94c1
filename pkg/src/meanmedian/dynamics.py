"""Functional mean-median map on bundles: iteration, stabilization, limit and transit time."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .numeric import Q, Rational, fmt
from .orbit import iterate_until_stable
from .pwa import (Bundle, PiecewiseAffine, affine_combine, bundle_median, bundle_sum,
                  equality_intervals)

N_MAX = 300


class FunctionalOrbit:
    """Y_1..Y_n0 (the initial bundle) followed by generated Y_{n0+1}, ...; medians M_n for n >= n0."""

    def __init__(self, initial: Bundle):
        self.initial = initial
        self.n0 = len(initial)
        self.functions = list(initial.functions)
        self._medians = {self.n0: bundle_median(self.functions)}
        self.stable_from = None  # first n with M_n == M_{n-1} on the whole domain

    @property
    def domain(self):
        return self.initial.domain

    @property
    def n(self) -> int:
        return len(self.functions)

    @property
    def generated(self) -> list:
        return self.functions[self.n0:]

    def Y(self, k: int) -> PiecewiseAffine:
        """Y_k, 1-based; indices past the stabilization time repeat the limit."""
        if k > self.n and self.stable_from is not None:
            return self._medians[self.stable_from]
        return self.functions[k - 1]

    def M(self, n: int) -> PiecewiseAffine:
        if n > self.n and self.stable_from is not None:
            return self._medians[self.stable_from]
        return self._medians[n]

    def bundle(self, n: int) -> list:
        return [self.Y(k) for k in range(1, n + 1)]

    def step(self) -> PiecewiseAffine:
        n = self.n
        if n == self.n0:
            Y = affine_combine([(n + 1, self._medians[n]), (-1, bundle_sum(self.functions))])
        else:
            Y = affine_combine([(n + 1, self._medians[n]), (-n, self._medians[n - 1])])
        self.functions.append(Y)
        M = bundle_median(self.functions)
        self._medians[n + 1] = M
        if self.stable_from is None and M == self._medians[n]:
            self.stable_from = n + 1
        return Y

    def run(self, n_max: int, stop_when_stable: bool = True) -> FunctionalOrbit:
        while self.n < n_max:
            if stop_when_stable and self.stable_from is not None and self.n > self.stable_from:
                break
            self.step()
        return self

    @property
    def medians(self) -> list:
        return [self._medians[k] for k in sorted(self._medians)]

    def restrict(self, lo, hi) -> FunctionalOrbit:
        """Shrink the working domain in place; the map is pointwise, so nothing else changes."""
        self.initial = self.initial.restrict(lo, hi)
        self.functions = [f.restrict(lo, hi) for f in self.functions]
        self._medians = {k: M.restrict(lo, hi) for k, M in self._medians.items()}
        if self.stable_from is None:
            for k in sorted(self._medians)[1:]:
                if self._medians[k] == self._medians[k - 1]:
                    self.stable_from = k
                    break
        return self


def iterate_bundle(initial: Bundle, n_max: int = N_MAX, stop_when_stable: bool = True) -> FunctionalOrbit:
    """Iterate until the bundle has n_max members, or one step past global stabilization."""
    if n_max < 1:
        raise ValueError("n_max must be positive")
    return FunctionalOrbit(initial).run(n_max, stop_when_stable)


# interval bookkeeping

def _intersect(A, B):
    out = []
    i = j = 0
    while i < len(A) and j < len(B):
        lo = max(A[i][0], B[j][0])
        hi = min(A[i][1], B[j][1])
        if lo < hi:
            out.append((lo, hi))
        if A[i][1] < B[j][1]:
            i += 1
        else:
            j += 1
    return out


def _subtract(A, B):
    out = []
    for lo, hi in A:
        cur = lo
        for a, b in B:
            if b <= cur or a >= hi:
                continue
            if a > cur:
                out.append((cur, a))
            cur = max(cur, b)
        if cur < hi:
            out.append((cur, hi))
    return out


@dataclass
class Atom:
    lo: Rational
    hi: Rational
    resolved: bool
    limit: Optional[PiecewiseAffine] = None
    tau: Optional[int] = None

    def to_row(self):
        if not self.resolved:
            return [fmt(self.lo), fmt(self.hi), "", "", ""]
        s, c = self.limit.slopes[0], self.limit.intercepts[0]
        return [fmt(self.lo), fmt(self.hi), fmt(s), fmt(c), str(self.tau)]


@dataclass
class StabilizationMap:
    """Open atoms partitioning the working interval, each resolved (affine limit, constant tau) or not."""

    atoms: list
    steps: int

    @property
    def resolved(self) -> list:
        return [a for a in self.atoms if a.resolved]

    @property
    def unresolved(self) -> list:
        return [a for a in self.atoms if not a.resolved]

    @property
    def fully_resolved(self) -> bool:
        return all(a.resolved for a in self.atoms)

    def limit(self) -> Optional[PiecewiseAffine]:
        """The limit function as one PiecewiseAffine when every atom is resolved."""
        if not self.fully_resolved:
            return None
        bs = [self.atoms[0].lo] + [a.hi for a in self.atoms]
        ss = [a.limit.slopes[0] for a in self.atoms]
        cs = [a.limit.intercepts[0] for a in self.atoms]
        return PiecewiseAffine(bs, ss, cs)

    def tau_at(self, x) -> Optional[int]:
        """Transit time on the open atom containing x (None at atom boundaries)."""
        x = Q(x)
        for a in self.atoms:
            if a.lo < x < a.hi:
                return a.tau if a.resolved else None
        return None

    def rows(self):
        return [a.to_row() for a in self.atoms]


def stabilization_map(orbit: FunctionalOrbit) -> StabilizationMap:
    """Partition the domain by stabilization status and transit time.

    A point is resolved when M_N = M_{N-1} there (N the last computed median); every later Y equals M_N.
    The transit time on an atom is the least k > n0 with Y_k = Y_{k+1} = ... on that atom.
    """
    lo, hi = orbit.domain
    N = max(orbit._medians)
    if N == orbit.n0:
        return StabilizationMap([Atom(lo, hi, False)], 0)
    MN = orbit.M(N)
    resolved = equality_intervals(MN, orbit.M(N - 1))
    # tail: Y_{N+1} = M_N on resolved; walk backwards over generated functions equal to M_N
    tau_parts = []
    current = resolved
    k = N
    while current and k > orbit.n0:
        eq = _intersect(current, equality_intervals(orbit.Y(k), MN)) if k <= orbit.n else current
        for part in _subtract(current, eq):
            tau_parts.append((part[0], part[1], k + 1))
        current = eq
        k -= 1
    for part in current:
        tau_parts.append((part[0], part[1], orbit.n0 + 1))
    tau_parts.sort()
    atoms = []
    cur = lo
    for a, b, t in tau_parts:
        if a > cur:
            atoms.append(Atom(cur, a, False))
        piece = MN.piece_on(a, b)
        sub_bounds = [a] + [x for x in MN.breaks if a < x < b] + [b]
        for u, v in zip(sub_bounds, sub_bounds[1:]):
            atoms.append(Atom(u, v, True, MN.restrict(u, v), t))
        cur = b
    if cur < hi:
        atoms.append(Atom(cur, hi, False))
    # merge neighbours with identical data
    merged = []
    for at in atoms:
        if merged:
            prev = merged[-1]
            if prev.resolved == at.resolved and prev.hi == at.lo and (not at.resolved or (
                    prev.tau == at.tau and prev.limit.slopes[0] == at.limit.slopes[0]
                    and prev.limit.intercepts[0] == at.limit.intercepts[0])):
                merged[-1] = Atom(prev.lo, at.hi, at.resolved,
                                  MN.restrict(prev.lo, at.hi) if at.resolved else None, at.tau)
                continue
        merged.append(at)
    return StabilizationMap(merged, N - orbit.n0)


def limit_function(initial: Bundle, interval=None, n_max: int = N_MAX) -> StabilizationMap:
    B = initial if interval is None else initial.restrict(*interval)
    return stabilization_map(iterate_bundle(B, n_max))


def transit_time_function(initial: Bundle, interval=None, n_max: int = N_MAX) -> StabilizationMap:
    return limit_function(initial, interval, n_max)


def point_values(B: Bundle, x) -> list:
    return [f(x) for f in B.functions]


def point_orbit(B: Bundle, x, max_steps: int = 10_000):
    """Scalar orbit of the bundle evaluated at x."""
    return iterate_until_stable(point_values(B, x), max_steps)


def check_equivalence(A: Bundle, B: Bundle, mu, f, samples) -> bool:
    """True iff f_x(B(x)) = A(mu(x)) as multisets at each sample; f maps x to an AffineMap."""
    for x in samples:
        x = Q(x)
        fx = f(x)
        lhs = sorted(fx(v) for v in point_values(B, x))
        rhs = sorted(point_values(A, mu(x)))
        if lhs != rhs:
            return False
    return True


def _lines_of(B: Bundle):
    lines = []
    for f in B.functions:
        for s, c in zip(f.slopes, f.intercepts):
            lines.append((s, c))
    return lines


def check_initial_conditions(B: Bundle) -> dict:
    """Report on the standing conditions for initial bundles.

    (i) B is not the image of a shorter bundle: heuristic, tests whether removing the largest
        generated-looking member leaves a bundle whose image is that member.
    (ii) median and mean agree only at isolated points.
    (iii) not all lines of the bundle are concurrent (parallel lines count as concurrent at infinity).
    """
    funcs = B.functions
    report = {}
    img_ok = True
    if len(funcs) >= 2:
        for k in range(len(funcs)):
            rest = funcs[:k] + funcs[k + 1:]
            cand = affine_combine([(len(rest) + 1, bundle_median(rest)), (-1, bundle_sum(rest))])
            if cand == funcs[k]:
                img_ok = False
                break
    report["not_an_image"] = img_ok
    report["not_an_image_heuristic"] = True
    med = bundle_median(funcs)
    mean = bundle_sum(funcs).scale(Q(1, len(funcs)))
    report["median_ne_mean"] = not equality_intervals(med, mean)
    lines = sorted(set(_lines_of(B)))
    concurrent = True
    if len(lines) >= 2:
        slopes = {s for s, _ in lines}
        if len(slopes) > 1:
            (s1, c1), (s2, c2) = next((a, b) for a in lines for b in lines if a[0] != b[0])
            xc = (c2 - c1) / (s1 - s2)
            yc = s1 * xc + c1
            concurrent = all(s * xc + c == yc for s, c in lines)
    report["not_concurrent"] = not concurrent
    report["ok"] = img_ok and report["median_ne_mean"] and not concurrent
    return report
