"""The normal form: a one-parameter dyadic system governing proper active X-points of a given transit time.

The order t (odd, >= 5) fixes the seed: finite part [0, 1], medians M_{t-2} = 0 and M_{t-1} = 1/2.
The elements pushed to plus and minus infinity never reach the core, so only the finite part is stored.
"""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass, field
from math import isqrt
from typing import Optional

from .numeric import Q, Rational, fmt, nu2
from .orbit import RationalMultiset, _core, _median, core_step

NF_CAP = 20_000


def _check_order(t):
    if not isinstance(t, int) or t < 5 or t % 2 == 0:
        raise ValueError("order t must be an odd integer >= 5")


@dataclass
class NormalFormOrbit:
    t: int
    y: list                               # y_t, y_{t+1}, ...
    gamma: RationalMultiset               # finite part of the current set
    medians: list                         # M_{t-2}, M_{t-1}, M_t, ...
    m_t: Optional[Rational] = None
    tau_t: Optional[int] = None
    kappa: list = field(default_factory=list)   # kappa(n) for n = t, t+1, ...
    core_checked: bool = False

    @property
    def stabilized(self) -> bool:
        return self.tau_t is not None

    def y_at(self, n: int) -> Rational:
        if n < self.t:
            raise IndexError("normal form elements start at index t")
        if n - self.t >= len(self.y):
            if self.stabilized:
                return self.m_t
            raise IndexError(f"y_{n} not computed")
        return self.y[n - self.t]

    def median_at(self, n: int) -> Rational:
        k = n - (self.t - 2)
        if k < 0:
            raise IndexError("medians start at index t-2")
        if k >= len(self.medians):
            if self.stabilized:
                return self.m_t
            raise IndexError(f"M_{n} not computed")
        return self.medians[k]

    def kappa_at(self, n: int) -> int:
        k = n - self.t
        if k < 0:
            raise IndexError("kappa starts at index t")
        if k >= len(self.kappa):
            if self.stabilized:
                return self.kappa[-1]
            raise IndexError(f"kappa({n}) not computed")
        return self.kappa[k]

    def rows(self):
        """(n, y_n, M_n) for every computed n >= t."""
        return [(self.t + i, fmt(v), fmt(self.medians[i + 2])) for i, v in enumerate(self.y)]


def nf_run(t: int, cap: int = NF_CAP, min_length: int = 0, check_core: bool = True) -> NormalFormOrbit:
    """Iterate the normal form of order t until the median repeats (or `cap` elements).

    `min_length` keeps iterating past stabilization; the tail then just repeats the limit.
    With `check_core`, every element is recomputed from the core recursion and compared.
    """
    _check_order(t)
    if cap < 1:
        raise ValueError("cap must be positive")
    s = [Q(0), Q(1)]
    meds = [Q(0), Q(1, 2)]
    ys, kappa = [], []
    k = 0
    tau = None
    n = t
    while len(ys) < cap:
        y = n * meds[-1] - (n - 1) * meds[-2]
        if check_core and n >= t + 1:
            # the core of the set of size n-2 is taken before y_{n-1} is inserted
            prev = s.copy()
            prev.remove(ys[-1])
            if core_step(ys[-1], _core(prev), n) != y:
                raise AssertionError(f"core recursion disagrees at n={n}, t={t}")
        insort(s, y)
        ys.append(y)
        k = max(k, nu2(y.denominator))
        kappa.append(k)
        meds.append(_median(s))
        if tau is None and meds[-1] == meds[-2]:
            tau = n + 1
            while tau - 1 >= t and ys[tau - 1 - t] == meds[-1]:
                tau -= 1
        if tau is not None and len(ys) >= min_length:
            break
        n += 1
    orbit = NormalFormOrbit(t, ys, RationalMultiset(), meds, kappa=kappa, core_checked=check_core)
    orbit.gamma.elements = s
    if tau is not None:
        orbit.m_t, orbit.tau_t = meds[-1], tau
    return orbit


# regular phase

def u_exceeded(t: int, ell: int) -> bool:
    """t > ell + 1 + sqrt(5 ell^2 + 6 ell + 5), decided in integers."""
    a = t - ell - 1
    return a > 0 and a * a > 5 * ell * ell + 6 * ell + 5


def regular_phase_length(t: int) -> int:
    """L_t = max{ell >= 0 : t > u_ell}, from the closed ceiling expression with an exact square root."""
    _check_order(t)
    D = 5 * t * t - 4 * t - 12
    s = isqrt(D)
    a = -t - 2
    if s * s == D:
        c = -((-(a + s)) // 4)
    else:
        c = (a + s) // 4 + 1
    L = c - 1
    # the defining property, checked at L and L+1 (u_ell is increasing)
    if not (u_exceeded(t, L) and not u_exceeded(t, L + 1)):
        raise AssertionError(f"ceiling formula for L_t disagrees with its definition at t={t}")
    return L


def regular_phase_end(t: int) -> int:
    """N_t = t + 4 L_t + 3."""
    return t + 4 * regular_phase_length(t) + 3


def closed_form(t: int, n: int) -> Rational:
    """y_n for t <= n <= N_t + 2 from the regular-phase formulas."""
    _check_order(t)
    L = regular_phase_length(t)
    if not t <= n <= t + 4 * L + 5:
        raise ValueError(f"closed forms cover t <= n <= N_t+2 = {t + 4 * L + 5}")
    ell, r = divmod(n - t, 4)
    T = Q(t)
    if r == 0:
        return Q(ell + 1, 2) * T + ell * ell + ell
    if r == 1:
        return Q(ell + 1, 2) * T + ell * ell + ell + 1
    if r == 2:
        return T * T / 4 + Q(5, 2) * ell * T + 5 * ell * ell - ell
    return T * T / 4 + Q(5 * ell + 1, 2) * T + 5 * ell * ell + ell - 1


def _ordering_chain(t: int, L: int) -> list:
    """Indices of the regular-phase elements in increasing order of value, after step t+4L+3."""
    low = [t, t + 1]
    for ell in range(1, L + 1):
        low += [t + 4 * ell, t + 4 * ell + 1]
    high = [t + 2, t + 3]
    for ell in range(1, L + 1):
        high += [t + 4 * ell + 2, t + 4 * ell + 3]
    return low + high


@dataclass
class RegularPhaseReport:
    t: int
    L_t: int
    N_t: int
    closed_form_values: dict          # n -> y_n for t <= n <= N_t + 2
    lower_bound_m: Rational
    lower_bound_tau: int
    ordering_chain_verified: bool
    matches_recursion: Optional[bool] = None
    extra_positions: Optional[tuple] = None   # ranks of y_{N_t+1}, y_{N_t+2} in the sorted finite part

    def to_dict(self):
        return {"t": self.t, "L_t": self.L_t, "N_t": self.N_t,
                "lower_bound_m": fmt(self.lower_bound_m), "lower_bound_tau": self.lower_bound_tau,
                "ordering_chain_verified": self.ordering_chain_verified,
                "matches_recursion": self.matches_recursion,
                "extra_positions": self.extra_positions}


def nf_bounds(t: int):
    """(m_lower, tau_lower): m_t >= y_{t+4L+1} and tau_t >= N_t + 2."""
    L = regular_phase_length(t)
    return Q(L + 1, 2) * t + L * L + L + 1, t + 4 * L + 5


def nf_regular_phase(t: int, orbit: Optional[NormalFormOrbit] = None) -> RegularPhaseReport:
    """Closed forms up to N_t + 2, the ordering chains, and (if an orbit is given) the recursion check."""
    L = regular_phase_length(t)
    N = t + 4 * L + 3
    vals = {n: closed_form(t, n) for n in range(t, N + 3)}
    chain = [Q(0), Q(1)] + [vals[n] for n in _ordering_chain(t, L)]
    ok = all(a < b for a, b in zip(chain, chain[1:]))
    if L >= 1:
        for ell in range(1, L + 1):
            ok = ok and vals[t + 4 * ell - 3] < vals[t + 4 * ell] < vals[t + 4 * ell + 1] < vals[t + 2]
            ok = ok and vals[t + 4 * ell - 1] < vals[t + 4 * ell + 2] < vals[t + 4 * ell + 3]
    m_low, tau_low = nf_bounds(t)
    rep = RegularPhaseReport(t, L, N, vals, m_low, tau_low, ok)
    if orbit is not None:
        if orbit.t != t:
            raise ValueError("orbit has a different order")
        rep.matches_recursion = all(orbit.y_at(n) == v for n, v in vals.items())
        finite = sorted([Q(0), Q(1)] + [orbit.y_at(n) for n in range(t, N + 3)])
        rep.extra_positions = (finite.index(vals[N + 1]), finite.index(vals[N + 2]))
    return rep


def nf_kappa(orbit: NormalFormOrbit) -> list:
    return list(orbit.kappa)


def check_effexp(t: int, orbit: Optional[NormalFormOrbit] = None) -> bool:
    """kappa(N_t + 2) == 2."""
    N = regular_phase_end(t)
    if orbit is None:
        orbit = nf_run(t, min_length=N + 3 - t)
    if len(orbit.kappa) < N + 3 - t and not orbit.stabilized:
        raise ValueError("orbit too short for kappa(N_t+2)")
    return orbit.kappa_at(N + 2) == 2


def nf_check_conjecture_mt(t: int, orbit: Optional[NormalFormOrbit] = None) -> Optional[bool]:
    """m_t < y_{N_t}; None when the orbit did not stabilise. Stated for t >= 9."""
    if t < 9:
        raise ValueError("the comparison is made for t >= 9")
    orbit = orbit or nf_run(t)
    if not orbit.stabilized:
        return None
    return orbit.m_t < orbit.y_at(regular_phase_end(t))


@dataclass
class NormalFormRow:
    t: int
    m_t: Optional[Rational]
    tau_t: Optional[int]
    L_t: int
    N_t: int
    m_lower: Rational
    tau_lower: int
    kappa_at_Nt2: Optional[int]
    conjecture_mt_holds: Optional[bool]

    HEADER = ("t", "m_t_num", "m_t_den", "tau_t", "L_t", "N_t", "m_lower", "tau_lower",
              "kappa_at_Nt2", "conjecture_mt_holds")

    def csv_row(self):
        num = "" if self.m_t is None else str(self.m_t.numerator)
        den = "" if self.m_t is None else str(self.m_t.denominator)
        return [self.t, num, den, "" if self.tau_t is None else self.tau_t, self.L_t, self.N_t,
                fmt(self.m_lower), self.tau_lower,
                "" if self.kappa_at_Nt2 is None else self.kappa_at_Nt2,
                "" if self.conjecture_mt_holds is None else self.conjecture_mt_holds]


def nf_summary(t: int, cap: int = NF_CAP) -> NormalFormRow:
    L = regular_phase_length(t)
    N = t + 4 * L + 3
    orbit = nf_run(t, cap, min_length=N + 3 - t, check_core=False)
    m_low, tau_low = nf_bounds(t)
    try:
        kap = orbit.kappa_at(N + 2)
    except IndexError:
        kap = None
    conj = nf_check_conjecture_mt(t, orbit) if t >= 9 else None
    return NormalFormRow(t, orbit.m_t, orbit.tau_t, L, N, m_low, tau_low, kap, conj)


def nf_sweep(orders, cap: int = NF_CAP, workers: int = 1) -> list:
    """Summaries for each order, sorted by t; orders are independent so they may run in parallel."""
    orders = sorted(set(orders))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(workers) as ex:
            rows = list(ex.map(nf_summary, orders, [cap] * len(orders)))
    else:
        rows = [nf_summary(t, cap) for t in orders]
    return sorted(rows, key=lambda r: r.t)


# lift to X-point neighbourhoods

def nf_lift(Y_i, Y_j, orbit: NormalFormOrbit, x, n_range=None, p=None, side: Optional[str] = None) -> dict:
    """Y_n(x) = (Y_j(x) - Y_i(x)) y_n + Y_i(x) for n >= t (n_range defaults to t..t+len(y)-1).

    When p and side are given, the side must be one where Y_i < Y_j.
    """
    x = Q(x)
    a, b = Y_i(x), Y_j(x)
    if side is not None:
        if side not in ("left", "right"):
            raise ValueError("side is 'left' or 'right'")
        if p is not None and (x - Q(p)) * (1 if side == "right" else -1) < 0:
            raise ValueError("sample lies on the other side of the X-point")
        if a > b:
            raise ValueError("Y_i >= Y_j on this side; swap the pair")
    ns = n_range if n_range is not None else range(orbit.t, orbit.t + len(orbit.y))
    return {n: (b - a) * orbit.y_at(n) + a for n in ns}


def nf_lift_limit(Y_i, Y_j, orbit: NormalFormOrbit, x) -> Optional[Rational]:
    if not orbit.stabilized:
        return None
    x = Q(x)
    return (Y_j(x) - Y_i(x)) * orbit.m_t + Y_i(x)
