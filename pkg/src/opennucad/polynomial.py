"""Sparse multivariate polynomials over the integers.

Polynomials live in ZZ[x1, ..., xn] with a fixed variable order; the last
variable is the main (projection) variable.  Terms are stored as a mapping
from exponent tuples to nonzero Python ints.

The canonical term order is recursive lexicographic with x_n most
significant: terms are compared by their x_n exponent first, then x_{n-1},
and so on.  This is the order every CAD operation thinks in (leading
coefficient, degree in the main variable), and it is also the order used
for printing and for sign normalization.

Resultants and discriminants are computed here with a subresultant PRS.
Greatest common divisors and irreducible factorization are delegated to
sympy's sparse polynomial rings.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Poly",
    "PolynomialError",
    "eval_partial",
    "specialize",
    "resultant",
    "discriminant",
    "leading_coeff",
    "normalize",
    "factors",
    "squarefree_basis",
    "factor_univariate",
    "proj_open_mc",
    "parse_poly",
    "default_names",
    "poly_key",
]


class PolynomialError(ValueError):
    pass


def _rev(exp: tuple[int, ...]) -> tuple[int, ...]:
    return exp[::-1]


class Poly:
    """Immutable sparse polynomial in ``nvars`` ordered variables."""

    __slots__ = ("nvars", "terms", "_hash", "_level")

    def __init__(self, nvars: int, terms: Mapping[tuple[int, ...], int] | None = None):
        self.nvars = nvars
        clean = {}
        if terms:
            for exp, c in terms.items():
                if c:
                    if len(exp) != nvars:
                        raise PolynomialError(f"exponent {exp} does not match {nvars} variables")
                    clean[exp] = int(c)
        self.terms: dict[tuple[int, ...], int] = clean
        self._hash = None
        self._level = None

    # construction -------------------------------------------------------

    @classmethod
    def const(cls, nvars: int, c: int) -> Poly:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int) -> Poly:
        """The polynomial x_{i+1} (``i`` is a 0-based variable index)."""
        exp = [0] * nvars
        exp[i] = 1
        return cls(nvars, {tuple(exp): 1})

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> Poly:
        # terms already zero-free
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._hash = None
        p._level = None
        return p

    # basic predicates ---------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return self.level == 0

    def constant_value(self) -> int:
        if not self.is_constant():
            raise PolynomialError("polynomial is not constant")
        return self.terms.get((0,) * self.nvars, 0)

    @property
    def level(self) -> int:
        """1-based index of the highest variable present; 0 for constants."""
        if self._level is None:
            lev = 0
            for exp in self.terms:
                for i in range(self.nvars - 1, lev - 1, -1):
                    if exp[i]:
                        lev = i + 1
                        break
            self._level = lev
        return self._level

    def degree(self, var: int) -> int:
        """Degree in the variable with 0-based index ``var`` (-1 for zero)."""
        if not self.terms:
            return -1
        return max(exp[var] for exp in self.terms)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(exp) for exp in self.terms)

    def leading_term(self) -> tuple[tuple[int, ...], int]:
        exp = max(self.terms, key=_rev)
        return exp, self.terms[exp]

    def content(self) -> int:
        g = 0
        for c in self.terms.values():
            g = math.gcd(g, c)
        return g

    # arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, int):
            other = Poly.const(self.nvars, other)
        out = dict(self.terms)
        for exp, c in other.terms.items():
            v = out.get(exp, 0) + c
            if v:
                out[exp] = v
            else:
                out.pop(exp, None)
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = Poly.const(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            if other == 0:
                return Poly._raw(self.nvars, {})
            return Poly._raw(self.nvars, {e: c * other for e, c in self.terms.items()})
        out: dict = {}
        n = self.nvars
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(e1[i] + e2[i] for i in range(n))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Poly._raw(n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise PolynomialError("negative power")
        result = Poly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def exquo(self, other: Poly) -> Poly:
        """Exact quotient ``self / other``; raises if the division leaves a remainder."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if len(other.terms) == 1:
            (de, dc), = other.terms.items()
            out = {}
            for e, c in self.terms.items():
                q, r = divmod(c, dc)
                ne = tuple(a - b for a, b in zip(e, de))
                if r or min(ne, default=0) < 0:
                    raise PolynomialError("inexact division")
                out[ne] = q
            return Poly._raw(self.nvars, out)
        lead_e, lead_c = other.leading_term()
        rem = dict(self.terms)
        quot: dict = {}
        n = self.nvars
        while rem:
            e = max(rem, key=_rev)
            c = rem[e]
            ne = tuple(e[i] - lead_e[i] for i in range(n))
            q, r = divmod(c, lead_c)
            if r or min(ne, default=0) < 0:
                raise PolynomialError("inexact division")
            quot[ne] = q
            for oe, oc in other.terms.items():
                te = tuple(ne[i] + oe[i] for i in range(n))
                v = rem.get(te, 0) - q * oc
                if v:
                    rem[te] = v
                else:
                    rem.pop(te, None)
        return Poly._raw(n, quot)

    def diff(self, var: int) -> Poly:
        out = {}
        for e, c in self.terms.items():
            k = e[var]
            if k:
                ne = list(e)
                ne[var] = k - 1
                out[tuple(ne)] = c * k
        return Poly._raw(self.nvars, out)

    def coeffs(self, var: int) -> list[Poly]:
        """Coefficients of powers of ``var`` (index = power), each free of ``var``."""
        d = self.degree(var)
        buckets: list[dict] = [{} for _ in range(max(d + 1, 1))]
        for e, c in self.terms.items():
            k = e[var]
            ne = list(e)
            ne[var] = 0
            buckets[k][tuple(ne)] = c
        return [Poly._raw(self.nvars, b) for b in buckets]

    # evaluation ---------------------------------------------------------

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        """Exact value at a rational point covering every variable that occurs."""
        point = [Fraction(v) for v in point]
        total = Fraction(0)
        for e, c in self.terms.items():
            t = Fraction(c)
            for i, k in enumerate(e):
                if k:
                    t *= point[i] ** k
            total += t
        return total

    def sign_at(self, point: Sequence[Fraction]) -> int:
        v = self.evaluate(point)
        return (v > 0) - (v < 0)

    # comparison / hashing ----------------------------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            return self.is_constant() and self.constant_value() == other
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __reduce__(self):
        return (Poly, (self.nvars, self.terms))

    # text ---------------------------------------------------------------

    def sorted_terms(self) -> list[tuple[tuple[int, ...], int]]:
        return sorted(self.terms.items(), key=lambda t: _rev(t[0]), reverse=True)

    def to_text(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = default_names(self.nvars)
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            mono = []
            for i in range(self.nvars):
                k = e[i]
                if k == 1:
                    mono.append(names[i])
                elif k > 1:
                    mono.append(f"{names[i]}^{k}")
            body = "*".join(mono)
            if not body:
                term = str(abs(c))
            elif abs(c) == 1:
                term = body
            else:
                term = f"{abs(c)}{body}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, term))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, term in parts[1:]:
            out += sign + term
        return out

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"Poly({self.to_text()!r})"


def default_names(n: int) -> list[str]:
    if n <= 3:
        return ["x", "y", "z"][:n]
    return [f"x{i + 1}" for i in range(n)]


def poly_key(p: Poly):
    """Deterministic sort key: level, total degree, then canonical term list."""
    return (p.level, p.total_degree(), [(_rev(e), c) for e, c in p.sorted_terms()])


def normalize(p: Poly) -> Poly:
    """Primitive part with positive leading coefficient (canonical order)."""
    if p.is_zero():
        return p
    g = p.content()
    _, lc = p.leading_term()
    if lc < 0:
        g = -g
    if g == 1:
        return p
    return Poly._raw(p.nvars, {e: c // g for e, c in p.terms.items()})


# ---------------------------------------------------------------------------
# substitution


def eval_partial(p: Poly, prefix: Sequence[Fraction]) -> Poly:
    """Bind x1..xk to the rationals in ``prefix`` and renumber the rest.

    The result lives in n-k variables.  Denominators are cleared by a
    positive integer factor, so signs and roots are those of the exact
    specialization.
    """
    k = len(prefix)
    if k > p.nvars:
        raise PolynomialError("prefix longer than the variable list")
    prefix = [Fraction(v) for v in prefix]
    degs = [p.degree(i) if p.terms else 0 for i in range(k)]
    out: dict = {}
    for e, c in p.terms.items():
        v = c
        for i in range(k):
            a = prefix[i]
            v *= a.numerator ** e[i] * a.denominator ** (degs[i] - e[i])
        if v:
            rest = e[k:]
            nv = out.get(rest, 0) + v
            if nv:
                out[rest] = nv
            else:
                out.pop(rest, None)
    return Poly._raw(p.nvars - k, out)


@lru_cache(maxsize=1 << 16)
def specialize(p: Poly, prefix: tuple[Fraction, ...]) -> tuple[int, ...]:
    """Dense integer coefficients (low to high) of p at ``prefix`` as a
    univariate polynomial in the next variable.

    ``p`` must not involve variables beyond x_{k+1}.  The coefficients are
    scaled by a positive integer.  The zero polynomial is returned as ().
    """
    k = len(prefix)
    if p.level > k + 1:
        raise PolynomialError(f"level {p.level} polynomial cannot be specialized at {k} coordinates")
    q = eval_partial(p, prefix)
    if q.is_zero():
        return ()
    deg = max(e[0] for e in q.terms) if q.nvars else 0
    dense = [0] * (deg + 1)
    for e, c in q.terms.items():
        dense[e[0] if q.nvars else 0] += c
    g = 0
    for c in dense:
        g = math.gcd(g, c)
    if g > 1:
        dense = [c // g for c in dense]
    return tuple(dense)


# ---------------------------------------------------------------------------
# resultants


def leading_coeff(p: Poly, var: int) -> Poly:
    cs = p.coeffs(var)
    return cs[-1]


def _prem(A: list[Poly], B: list[Poly]) -> list[Poly]:
    """Pseudo-remainder lc(B)^(degA-degB+1) * A mod B, in recursive form."""
    dA, dB = len(A) - 1, len(B) - 1
    lb = B[-1]
    R = list(A)
    steps = 0
    while R and len(R) - 1 >= dB:
        dR = len(R) - 1
        lr = R[-1]
        shift = dR - dB
        R = [c * lb for c in R]
        for j, bc in enumerate(B):
            R[j + shift] = R[j + shift] - lr * bc
        while R and R[-1].is_zero():
            R.pop()
        steps += 1
    missing = dA - dB + 1 - steps
    if missing > 0 and R:
        f = lb ** missing
        R = [c * f for c in R]
    return R


def _trim(cs: list[Poly]) -> list[Poly]:
    while cs and cs[-1].is_zero():
        cs.pop()
    return cs


@lru_cache(maxsize=1 << 14)
def resultant(p: Poly, q: Poly, var: int) -> Poly:
    """Resultant of p and q with respect to ``var`` (subresultant PRS).

    The value is exact, with the usual Sylvester-determinant sign
    convention; the result does not involve ``var``.
    """
    n = p.nvars
    one = Poly.const(n, 1)
    if p.is_zero() or q.is_zero():
        return Poly(n)
    A = _trim(p.coeffs(var))
    B = _trim(q.coeffs(var))
    dA, dB = len(A) - 1, len(B) - 1
    if dA == 0 and dB == 0:
        raise PolynomialError("no elimination variable")
    if dA == 0:
        return A[0] ** dB
    if dB == 0:
        return B[0] ** dA
    s = 1
    if dA < dB:
        A, B = B, A
        if dA % 2 == 1 and dB % 2 == 1:
            s = -1
    g = one
    h = one
    while True:
        dA, dB = len(A) - 1, len(B) - 1
        delta = dA - dB
        if dA % 2 == 1 and dB % 2 == 1:
            s = -s
        R = _prem(A, B)
        if not R:
            return Poly(n)
        A = B
        div = g * h ** delta
        B = [c.exquo(div) for c in R]
        g = A[-1]
        if delta != 0:
            h = (g ** delta).exquo(h ** (delta - 1))
        if len(B) - 1 == 0:
            dA = len(A) - 1
            res = (B[0] ** dA).exquo(h ** (dA - 1))
            return res if s > 0 else -res


@lru_cache(maxsize=1 << 14)
def discriminant(p: Poly, var: int) -> Poly:
    d = p.degree(var)
    if d < 1:
        raise PolynomialError("polynomial is constant in the discriminant variable")
    if d == 1:
        return Poly.const(p.nvars, 1)
    r = resultant(p, p.diff(var), var)
    r = r.exquo(leading_coeff(p, var))
    return -r if (d * (d - 1) // 2) % 2 else r


# ---------------------------------------------------------------------------
# gcd and factorization (sympy sparse rings)


@lru_cache(maxsize=None)
def _ring(n: int):
    from sympy.polys.domains import ZZ
    from sympy.polys.rings import ring

    R, *_ = ring([f"v{i}" for i in range(n)], ZZ)
    return R


def _to_ring(p: Poly):
    return _ring(p.nvars).from_dict(dict(p.terms))


def _from_ring(e, n: int) -> Poly:
    return Poly(n, {tuple(m): int(c) for m, c in e.items()})


def _gcd(a: Poly, b: Poly) -> Poly:
    if a.nvars == 0:
        return Poly.const(0, math.gcd(a.constant_value(), b.constant_value()))
    return normalize(_from_ring(_to_ring(a).gcd(_to_ring(b)), a.nvars))


@lru_cache(maxsize=1 << 14)
def factors(p: Poly) -> tuple[Poly, ...]:
    """Distinct irreducible nonconstant factors of p, normalized and sorted."""
    if p.is_zero():
        raise PolynomialError("cannot factor the zero polynomial")
    if p.is_constant():
        return ()
    _, fl = _to_ring(p).factor_list()
    out = {normalize(_from_ring(f, p.nvars)) for f, _ in fl}
    out = [f for f in out if not f.is_constant()]
    return tuple(sorted(out, key=poly_key))


def _sqf_parts(p: Poly) -> list[Poly]:
    if p.is_constant():
        return []
    _, fl = _to_ring(p).sqf_list()
    return [normalize(_from_ring(f, p.nvars)) for f, _ in fl if not _from_ring(f, p.nvars).is_constant()]


def squarefree_basis(polys: Iterable[Poly]) -> list[Poly]:
    """Finest pairwise-coprime squarefree basis of ``polys``.

    Every input is, up to a rational constant, a product of powers of the
    returned polynomials.
    """
    basis: list[Poly] = []
    for p in polys:
        if p.is_zero():
            raise PolynomialError("zero polynomial in squarefree basis input")
        for f in _sqf_parts(p):
            pending = [f]
            while pending:
                f = pending.pop()
                if f.is_constant():
                    continue
                for i, b in enumerate(basis):
                    g = _gcd(f, b)
                    if not g.is_constant():
                        del basis[i]
                        rest_b = normalize(b.exquo(g))
                        rest_f = normalize(f.exquo(g))
                        pending.extend(x for x in (g, rest_b, rest_f) if not x.is_constant())
                        break
                else:
                    basis.append(f)
    return sorted(set(basis), key=poly_key)


def factor_univariate(p: Poly) -> list[Poly]:
    """Irreducible factors over the rationals of a polynomial in one variable."""
    if p.is_zero():
        raise PolynomialError("cannot factor the zero polynomial")
    if sum(1 for i in range(p.nvars) if p.degree(i) > 0) > 1:
        raise PolynomialError("factor_univariate needs a polynomial in a single variable")
    return list(factors(p))


@lru_cache(maxsize=1 << 14)
def proj_open_mc(p: Poly, neighbors: tuple[Poly, ...] = ()) -> tuple[Poly, ...]:
    """Open McCallum projection factors of a level-k polynomial.

    Irreducible factors of the leading coefficient and discriminant of p in
    its main variable, plus those of the resultants of p with each
    same-level neighbor.  Constants are dropped; the result is sorted.
    """
    k = p.level
    if k == 0:
        raise PolynomialError("cannot project a constant")
    var = k - 1
    images = [leading_coeff(p, var), discriminant(p, var)]
    for b in neighbors:
        if b == p:
            continue
        if b.level != k:
            raise PolynomialError("projection neighbors must share the level of p")
        images.append(resultant(p, b, var))
    out: set[Poly] = set()
    for q in images:
        if q.is_zero():
            raise PolynomialError(f"projection of {p} vanishes identically")
        out.update(factors(q))
    return tuple(sorted(out, key=poly_key))


# ---------------------------------------------------------------------------
# parsing

def parse_poly(text: str, names: Sequence[str]) -> Poly:
    """Parse canonical (or hand written) polynomial text over ``names``."""
    from .formula import _Parser

    parser = _Parser(text, list(names))
    p = parser.poly()
    parser.expect_end()
    return p
