"""Exact real root isolation for univariate integer polynomials.

Univariate polynomials are handled as dense coefficient tuples, lowest
degree first.  Roots are isolated with Descartes' rule of signs and
bisection on the squarefree part; every open isolating interval has
rational endpoints that are not roots, so the polynomial changes sign
across it and refinement only needs sign evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from .polynomial import Poly, PolynomialError

__all__ = [
    "IsolatingInterval",
    "Ordering",
    "isolate_real_roots",
    "isolate_dense",
    "compare_to_root",
    "compare_roots",
    "simplest_rational_between",
    "rational_between_bounds",
    "root_position",
    "dense_of",
]

Dense = tuple  # tuple[int, ...], low degree first


class Ordering(IntEnum):
    """Position of a rational relative to a real root."""

    BELOW = -1
    EQUAL = 0
    ABOVE = 1


# ---------------------------------------------------------------------------
# dense integer polynomial helpers


def _strip(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _primitive(c: Sequence[int]) -> list[int]:
    c = _strip(list(c))
    if not c:
        return c
    g = 0
    for v in c:
        g = math.gcd(g, v)
    if c[-1] < 0:
        g = -g
    return [v // g for v in c]


def _deriv(c: Sequence[int]) -> list[int]:
    return [i * c[i] for i in range(1, len(c))]


def _prem(a: list[int], b: list[int]) -> list[int]:
    r = list(a)
    db = len(b) - 1
    lb = b[-1]
    while r and len(r) - 1 >= db:
        lr = r[-1]
        shift = len(r) - 1 - db
        r = [v * lb for v in r]
        for j, bv in enumerate(b):
            r[j + shift] -= lr * bv
        _strip(r)
    return r


def _gcd(a: Sequence[int], b: Sequence[int]) -> list[int]:
    a, b = _primitive(a), _primitive(b)
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _primitive(_prem(a, b))
        a, b = b, r
    return _primitive(a)


def _exquo(a: Sequence[int], b: Sequence[int]) -> list[int]:
    a = list(a)
    db = len(b) - 1
    q = [0] * max(len(a) - db, 1)
    while a and len(a) - 1 >= db:
        shift = len(a) - 1 - db
        c, r = divmod(a[-1], b[-1])
        if r:
            raise PolynomialError("inexact univariate division")
        q[shift] = c
        for j, bv in enumerate(b):
            a[j + shift] -= c * bv
        _strip(a)
    if a:
        raise PolynomialError("inexact univariate division")
    return _strip(q)


@lru_cache(maxsize=1 << 14)
def _sqf_part(c: Dense) -> Dense:
    c = _primitive(c)
    if len(c) <= 2:
        return tuple(c)
    g = _gcd(c, _deriv(c))
    if len(g) == 1:
        return tuple(c)
    return tuple(_primitive(_exquo(c, g)))


def _sign_at(c: Sequence[int], r: Fraction) -> int:
    """Sign of the polynomial at the rational r (homogeneous integer Horner)."""
    p, q = r.numerator, r.denominator
    acc = 0
    qpow = 1
    for v in reversed(c):
        acc = acc * p + v * qpow
        qpow *= q
    # acc = q^d * c(r) / ... up to the positive factor q^d
    return (acc > 0) - (acc < 0)


def _variations(seq: Sequence[int]) -> int:
    count = 0
    last = 0
    for v in seq:
        if v:
            if last and (v > 0) != (last > 0):
                count += 1
            last = v
    return count


def _taylor_shift1(c: list[int]) -> list[int]:
    c = list(c)
    n = len(c)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            c[j] += c[j + 1]
    return c


def _descartes_bound(c: Sequence[int], a: Fraction, b: Fraction) -> int:
    """Descartes' sign-variation bound on the number of roots in (a, b)."""
    d = len(c) - 1
    w = b - a
    A = a.numerator * w.denominator
    W = w.numerator * a.denominator
    D = a.denominator * w.denominator
    # h(y) = D^d * c(a + w y) via scaled Horner
    h = [c[d]]
    dpow = 1
    for i in range(d - 1, -1, -1):
        dpow *= D
        nh = [0] * (len(h) + 1)
        for j, v in enumerate(h):
            nh[j] += v * A
            nh[j + 1] += v * W
        nh[0] += c[i] * dpow
        h = nh
    # roots of h in (0, 1) <-> roots of (1+y)^d h(1/(1+y)) in (0, inf)
    h = list(reversed(h))
    return _variations(_taylor_shift1(h))


def _cauchy_bound(c: Sequence[int]) -> Fraction:
    lc = abs(c[-1])
    m = max(abs(v) for v in c[:-1])
    bound = 1 + Fraction(m, lc)
    k = 0
    while (1 << k) <= bound:
        k += 1
    return Fraction(1 << k)


def _isolate_sqf(c: Dense) -> list[tuple[Fraction, Fraction]]:
    """Isolating intervals (lo, hi) of a squarefree polynomial, sorted.

    Exact rational roots come back as (r, r).
    """
    if len(c) <= 1:
        return []
    if len(c) == 2:
        r = Fraction(-c[0], c[1])
        return [(r, r)]
    B = _cauchy_bound(c)
    out = []
    stack = [(-B, B)]
    while stack:
        lo, hi = stack.pop()
        v = _descartes_bound(c, lo, hi)
        if v == 0:
            continue
        if v == 1 and _sign_at(c, lo) != 0 and _sign_at(c, hi) != 0:
            out.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        if _sign_at(c, mid) == 0:
            out.append((mid, mid))
        stack.append((mid, hi))
        stack.append((lo, mid))
    out.sort(key=lambda iv: iv[0])
    return out


@lru_cache(maxsize=1 << 16)
def isolate_dense(c: Dense) -> tuple[tuple[Fraction, Fraction], ...]:
    """Isolate the distinct real roots of a nonzero dense integer polynomial."""
    if not c or not any(c):
        raise PolynomialError("cannot isolate roots of the zero polynomial")
    return tuple(_isolate_sqf(_sqf_part(tuple(c))))


# ---------------------------------------------------------------------------
# public interval type


def dense_of(p: Poly) -> Dense:
    """Dense coefficients of a polynomial involving at most one variable."""
    active = [i for i in range(p.nvars) if p.degree(i) > 0]
    if len(active) > 1:
        raise PolynomialError("polynomial is not univariate")
    var = active[0] if active else 0
    d = p.degree(var) if active else 0
    dense = [0] * (max(d, 0) + 1)
    for e, c in p.terms.items():
        dense[e[var] if p.nvars else 0] += c
    return tuple(_strip(dense))


@dataclass(frozen=True)
class IsolatingInterval:
    """A real root of ``coeffs`` isolated in [lower, upper].

    When lower < upper the root is the unique root of the squarefree part
    in the open interval and neither endpoint is a root.  lower == upper
    marks an exact rational root.
    """

    lower: Fraction
    upper: Fraction
    coeffs: Dense

    @property
    def poly(self) -> Poly:
        return Poly(1, {(i,): v for i, v in enumerate(self.coeffs)})

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def bisect(self) -> IsolatingInterval:
        if self.exact:
            return self
        mid = (self.lower + self.upper) / 2
        c = _sqf_part(self.coeffs)
        s = _sign_at(c, mid)
        if s == 0:
            return IsolatingInterval(mid, mid, self.coeffs)
        if s == _sign_at(c, self.lower):
            return IsolatingInterval(mid, self.upper, self.coeffs)
        return IsolatingInterval(self.lower, mid, self.coeffs)

    def refine(self, width: Fraction) -> IsolatingInterval:
        iv = self
        while iv.upper - iv.lower > width:
            iv = iv.bisect()
        return iv

    def compare(self, r: Fraction) -> Ordering:
        """Where the rational r sits relative to this root."""
        r = Fraction(r)
        if self.exact:
            return Ordering((r > self.lower) - (r < self.lower))
        if r <= self.lower:
            return Ordering.BELOW
        if r >= self.upper:
            return Ordering.ABOVE
        c = _sqf_part(self.coeffs)
        s = _sign_at(c, r)
        if s == 0:
            return Ordering.EQUAL
        return Ordering.ABOVE if s == _sign_at(c, self.lower) * -1 else Ordering.BELOW

    def approx(self) -> float:
        iv = self.refine(Fraction(1, 1 << 30))
        return float((iv.lower + iv.upper) / 2)


def _intervals(c: Dense) -> list[IsolatingInterval]:
    return [IsolatingInterval(lo, hi, c) for lo, hi in isolate_dense(c)]


def isolate_real_roots(p: Poly | Sequence[int]) -> list[IsolatingInterval]:
    """Sorted isolating intervals, one per distinct real root of p."""
    c = dense_of(p) if isinstance(p, Poly) else tuple(_strip(list(p)))
    if not c:
        raise PolynomialError("cannot isolate roots of the zero polynomial")
    return _intervals(c)


def compare_to_root(p: Poly | Sequence[int], k: int, r: Fraction) -> Ordering:
    """Position of r relative to the k-th smallest real root of p (1-based)."""
    roots = isolate_real_roots(p)
    if not 1 <= k <= len(roots):
        raise PolynomialError(f"root index {k} out of range: polynomial has {len(roots)} real roots")
    return roots[k - 1].compare(Fraction(r))


def root_position(c: Dense, r: Fraction) -> tuple[int, bool]:
    """(number of distinct real roots below r, whether r is a root)."""
    below = 0
    on = False
    for lo, hi in isolate_dense(c):
        if hi < r or (hi == r and lo < hi):
            below += 1
        elif lo > r or (lo == r and lo < hi):
            break
        else:
            o = IsolatingInterval(lo, hi, c).compare(r)
            if o == Ordering.ABOVE:
                below += 1
            elif o == Ordering.EQUAL:
                on = True
                break
            else:
                break
    return below, on


def compare_roots(a: IsolatingInterval, b: IsolatingInterval) -> int:
    """Sign of (root a - root b)."""
    if a.exact:
        return int(b.compare(a.lower))
    if b.exact:
        return -int(a.compare(b.lower))
    checked_common = False
    while True:
        if a.upper <= b.lower:
            return -1
        if b.upper <= a.lower:
            return 1
        if not checked_common:
            checked_common = True
            g = _gcd(a.coeffs, b.coeffs)
            if len(g) > 1:
                g = list(_sqf_part(tuple(g)))
                lo, hi = max(a.lower, b.lower), min(a.upper, b.upper)
                if _sign_at(g, lo) * _sign_at(g, hi) < 0:
                    return 0
        a, b = a.bisect(), b.bisect()
        if a.exact or b.exact:
            return compare_roots(a, b)


# ---------------------------------------------------------------------------
# choosing rationals


def _simplest_pos(a: Fraction, b: Optional[Fraction]) -> Fraction:
    # simplest rational in the open interval (a, b), 0 <= a < b (b None = inf)
    n = math.floor(a) + 1
    if b is None or n < b:
        return Fraction(n)
    fl = math.floor(a)
    x, y = a - fl, b - fl
    inner = _simplest_pos(1 / y, None if x == 0 else 1 / x)
    return fl + 1 / inner


def simplest_rational_between(lo: Optional[Fraction], hi: Optional[Fraction]) -> Fraction:
    """The rational of least denominator strictly inside (lo, hi).

    ``None`` stands for -inf (lo) or +inf (hi).  Among rationals with the
    least denominator the one of least absolute value is returned.
    """
    lo = None if lo is None else Fraction(lo)
    hi = None if hi is None else Fraction(hi)
    if lo is not None and hi is not None and lo >= hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    if (lo is None or lo < 0) and (hi is None or hi > 0):
        return Fraction(0)
    if lo is not None and lo >= 0:
        return _simplest_pos(lo, hi)
    return -_simplest_pos(-hi, None if lo is None else -lo)


def rational_between_bounds(
    lower: Optional[IsolatingInterval], upper: Optional[IsolatingInterval]
) -> Fraction:
    """Simplest rational strictly between two real algebraic numbers.

    ``None`` stands for the matching infinity.  The answer depends only on
    the two numbers, not on how far their intervals happen to be refined.
    """
    if lower is not None and upper is not None and compare_roots(lower, upper) >= 0:
        raise ValueError("empty fiber: lower bound is not below upper bound")
    while True:
        lo = None if lower is None else lower.lower
        hi = None if upper is None else upper.upper
        if lower is not None and lower.exact and upper is not None and upper.exact:
            return simplest_rational_between(lo, hi)
        c = simplest_rational_between(lo, hi)
        o_lo = Ordering.ABOVE if lower is None else lower.compare(c)
        o_hi = Ordering.BELOW if upper is None else upper.compare(c)
        if o_lo == Ordering.ABOVE and o_hi == Ordering.BELOW:
            return c
        # a rational root off the dyadic grid never becomes exact by
        # bisection, so pin it once the candidate lands on it
        if o_lo != Ordering.ABOVE:
            lower = IsolatingInterval(c, c, lower.coeffs) if o_lo == Ordering.EQUAL else lower.bisect()
        if o_hi != Ordering.BELOW:
            upper = IsolatingInterval(c, c, upper.coeffs) if o_hi == Ordering.EQUAL else upper.bisect()
