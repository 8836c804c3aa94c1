"""The scalar mean-median map on finite rational multisets."""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .numeric import Q, Rational

MAX_STEPS = 10_000


class RationalMultiset:
    """Sorted list of rationals with duplicates allowed."""

    def __init__(self, elements: Iterable = ()):
        self.elements = sorted(Q(x) for x in elements)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self):
        return f"RationalMultiset({[str(x) for x in self.elements]})"

    def insert(self, x):
        insort(self.elements, Q(x))

    def median(self) -> Rational:
        return _median(self.elements)

    def mean(self) -> Rational:
        if not self.elements:
            raise ValueError("empty multiset")
        return sum(self.elements, Q(0)) / len(self.elements)

    def core(self) -> RationalMultiset:
        return RationalMultiset(_core(self.elements))


def _median(s):
    n = len(s)
    if n == 0:
        raise ValueError("empty multiset")
    h = n // 2
    return s[h] if n % 2 else (s[h - 1] + s[h]) / 2


def _core(s):
    n = len(s)
    if n < 2:
        raise ValueError("core needs at least two elements")
    h = n // 2
    return s[h - 1:h + 1] if n % 2 == 0 else s[h - 1:h + 2]


def median(xs) -> Rational:
    return _median(sorted(Q(x) for x in xs))


def mean(xs) -> Rational:
    xs = [Q(x) for x in xs]
    if not xs:
        raise ValueError("empty multiset")
    return sum(xs, Q(0)) / len(xs)


def mmm_step(xs) -> Rational:
    """The element x_{n+1} = (n+1) median - n mean adjoined by one step."""
    xs = [Q(x) for x in xs]
    n = len(xs)
    return (n + 1) * median(xs) - sum(xs, Q(0))


def core(xs) -> list:
    return _core(sorted(Q(x) for x in xs))


def core_step(prev, lam, n: int) -> Rational:
    """x_n from x_{n-1} and the core of the (n-2)-element set.

    Valid for n >= |initial| + 4 on orbits with non-decreasing medians.
    """
    lam = sorted(Q(x) for x in lam)
    prev = Q(prev)
    if n % 2 == 0:
        if len(lam) != 2:
            raise ValueError("even n needs a two-element core")
        xi, xj = lam
        return prev + (xj - xi)
    if len(lam) != 3:
        raise ValueError("odd n needs a three-element core")
    xi, xj, xk = lam
    return prev + Q(n, 2) * (xk - xj) - Q(n - 2, 2) * (xj - xi)


@dataclass
class OrbitResult:
    limit: Optional[Rational]
    transit_time: Optional[int]
    steps_taken: int
    history: Optional[list] = None
    median_history: Optional[list] = None

    @property
    def stabilized(self) -> bool:
        return self.transit_time is not None


def iterate_until_stable(xs, max_steps: int = MAX_STEPS, keep_history: bool = False) -> OrbitResult:
    """Run the orbit until the median repeats, then back off to the first index of the constant tail.

    Elements are indexed from 1, so the first generated element has index len(xs)+1.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be positive")
    s = sorted(Q(x) for x in xs)
    n0 = len(s)
    if n0 == 0:
        raise ValueError("empty multiset")
    gen = []
    meds = [_median(s)]
    x = (n0 + 1) * meds[0] - sum(s, Q(0))
    n = n0
    while True:
        insort(s, x)
        gen.append(x)
        n += 1
        m = _median(s)
        meds.append(m)
        if m == meds[-2]:
            # every later element equals m; walk back over generated elements already equal to m
            tau = n + 1
            k = len(gen) - 1
            while k >= 0 and gen[k] == m:
                tau -= 1
                k -= 1
            return OrbitResult(m, tau, len(gen), gen if keep_history else None,
                               meds if keep_history else None)
        if len(gen) >= max_steps:
            return OrbitResult(None, None, len(gen), gen if keep_history else None,
                               meds if keep_history else None)
        x = (n + 1) * m - n * meds[-2]


def limit_and_tau(xs, max_steps: int = MAX_STEPS):
    r = iterate_until_stable(xs, max_steps)
    return r.limit, r.transit_time
