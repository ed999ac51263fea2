"""Independent checks for NuCAD trees.

Nothing here reuses the Descartes isolator for counting: root counts come
from Sturm sequences over exact rationals.  The sampling suites draw
seeded random rational points and test the tree's structural promises.
``build_open_cad`` is a small classical open CAD used only to count cells
for comparison.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .formula import Formula, evaluate, factors_of_formula
from .nucad import NuCADTree, locate
from .onecell import Membership, OpenCell, bound_polys, cell_contains, fiber
from .polynomial import Poly, PolynomialError, factors, poly_key, proj_open_mc, specialize
from .realroots import IsolatingInterval, compare_roots, isolate_dense, rational_between_bounds

__all__ = [
    "VerificationReport",
    "sturm_count",
    "random_point",
    "random_point_in_cell",
    "verify_truth_invariance",
    "verify_weak_decomposition",
    "verify_bpolys_in_closure",
    "open_mc_closure",
    "build_open_cad",
    "ClosureTooLarge",
]

MAX_WITNESSES = 50


@dataclass
class VerificationReport:
    check: str
    samples: int = 0
    boundary_resamples: int = 0
    violation_count: int = 0
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def add(self, witness) -> None:
        self.violation_count += 1
        if len(self.violations) < MAX_WITNESSES:
            self.violations.append(witness)

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "samples": self.samples,
            "boundary_resamples": self.boundary_resamples,
            "violation_count": self.violation_count,
            "violations": [str(v) for v in self.violations],
            "pass": self.passed,
        }


# ---------------------------------------------------------------------------
# Sturm sequences


def _dense(p) -> list[Fraction]:
    if isinstance(p, Poly):
        if p.level > 1:
            raise PolynomialError("sturm_count needs a univariate polynomial")
        d = [Fraction(0)] * (p.degree(0) + 1 if p.nvars else 1)
        for e, c in p.terms.items():
            d[e[0] if p.nvars else 0] += c
    else:
        d = [Fraction(c) for c in p]
    while d and d[-1] == 0:
        d.pop()
    return d


def _rem(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    a = list(a)
    while len(a) >= len(b):
        q = a[-1] / b[-1]
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[i + shift] -= q * c
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    return a


def _sign_at(a: list[Fraction], x: Optional[Fraction], at_minus_inf: bool) -> int:
    if x is None:
        s = 1 if a[-1] > 0 else -1
        return -s if at_minus_inf and (len(a) - 1) % 2 else s
    v = Fraction(0)
    for c in reversed(a):
        v = v * x + c
    return (v > 0) - (v < 0)


def sturm_count(p, lo: Optional[Fraction] = None, hi: Optional[Fraction] = None) -> int:
    """Number of distinct real roots of p in (lo, hi]; None means infinite."""
    a = _dense(p)
    if not a:
        raise PolynomialError("sturm_count of the zero polynomial")
    if lo is not None and hi is not None and Fraction(lo) >= Fraction(hi):
        raise ValueError("need lo < hi")
    # squarefree part via Euclid on p and p'
    da = [i * c for i, c in enumerate(a)][1:]
    if da:
        g, h = a, da
        while h:
            g, h = h, _rem(g, h)
        if len(g) > 1:
            # exact division a / g
            q = [Fraction(0)] * (len(a) - len(g) + 1)
            r = list(a)
            for k in range(len(q) - 1, -1, -1):
                q[k] = r[k + len(g) - 1] / g[-1]
                for i, c in enumerate(g):
                    r[k + i] -= q[k] * c
            a = q
    seq = [a]
    if len(a) > 1:
        seq.append([i * c for i, c in enumerate(a)][1:])
        while True:
            r = _rem(seq[-2], seq[-1])
            if not r:
                break
            seq.append([-c for c in r])

    def variations(x, minus_inf):
        signs = [s for s in (_sign_at(q, x, minus_inf) for q in seq) if s]
        return sum(1 for u, v in zip(signs, signs[1:]) if u != v)

    lo = None if lo is None else Fraction(lo)
    hi = None if hi is None else Fraction(hi)
    return variations(lo, True) - variations(hi, False)


# ---------------------------------------------------------------------------
# random points


def _coord(rng: random.Random, box: int = 64, den: int = 16) -> Fraction:
    if rng.random() < 0.1:
        # far draw: reciprocal of a small rational, probing unbounded cells
        return Fraction(rng.choice((-1, 1)) * rng.randint(1, 1000) * box, rng.randint(1, den))
    return Fraction(rng.randint(-box * den, box * den), rng.randint(1, den)) / 8


def random_point(rng: random.Random, n: int) -> tuple[Fraction, ...]:
    """A seeded random rational point, mostly within |x_i| <= 128."""
    return tuple(_coord(rng) for _ in range(n))


def _between(rng: random.Random, lo: Optional[IsolatingInterval], hi: Optional[IsolatingInterval]) -> Fraction:
    # random rational strictly between two real algebraic numbers
    width = Fraction(1, 1 << 12)
    for _ in range(64):
        a = None if lo is None else lo.refine(width).upper
        b = None if hi is None else hi.refine(width).lower
        if a is not None and b is not None:
            if a < b:
                u = Fraction(rng.randint(1, 1023), 1024)
                v = a + (b - a) * u
                if (lo is None or lo.compare(v) > 0) and (hi is None or hi.compare(v) < 0):
                    return v
            width /= 16
            continue
        step = Fraction(rng.randint(1, 4096), 256) ** 2
        if a is None and b is None:
            return Fraction(rng.randint(-4096, 4096), 256)
        v = a + step if b is None else b - step
        if (lo is None or lo.compare(v) > 0) and (hi is None or hi.compare(v) < 0):
            return v
    return rational_between_bounds(lo, hi)


def random_point_in_cell(cell: OpenCell, rng: random.Random) -> tuple[Fraction, ...]:
    """A random rational point of an open cell, built level by level."""
    point: list[Fraction] = []
    for i in range(1, cell.n + 1):
        lo, hi = fiber(cell.bounds, i, point)
        point.append(_between(rng, lo, hi))
    return tuple(point)


# ---------------------------------------------------------------------------
# sampling suites


def verify_truth_invariance(
    tree: NuCADTree, F: Formula, samples: int = 10_000, seed: int = 0
) -> VerificationReport:
    """Located truth value equals the exact truth value at random points."""
    rng = random.Random(seed)
    rep = VerificationReport("truth_invariance")
    while rep.samples < samples:
        pt = random_point(rng, tree.n)
        loc = locate(tree, pt)
        if loc.boundary:
            rep.boundary_resamples += 1
            continue
        rep.samples += 1
        if evaluate(F, pt) != loc.truth:
            rep.add((loc.label, tuple(str(v) for v in pt)))
    return rep


def verify_weak_decomposition(tree: NuCADTree, samples: int = 10_000, seed: int = 0) -> VerificationReport:
    """Each random point lies in exactly one leaf, in the parent of every cell
    containing it, and in exactly one child of every non-leaf containing it."""
    rng = random.Random(seed)
    rep = VerificationReport("weak_decomposition")
    kids = tree.child_map()
    labels = list(tree.cells)
    while rep.samples < samples:
        pt = random_point(rng, tree.n)
        inside = {}
        boundary = False
        for lab in labels:
            m = cell_contains(tree.cells[lab], pt)
            if m is Membership.BOUNDARY:
                boundary = True
                break
            inside[lab] = m is Membership.INSIDE
        if boundary:
            rep.boundary_resamples += 1
            continue
        rep.samples += 1
        pts = tuple(str(v) for v in pt)
        hits = [lab for lab in tree.truth if inside[lab]]
        if len(hits) != 1:
            rep.add(("leaves", hits, pts))
            continue
        for lab in labels:
            if not inside[lab]:
                continue
            par = lab[: -len(_last(lab))] if lab else None
            if par is not None and not inside.get(par, False):
                rep.add(("outside parent", lab, pts))
                break
            if kids[lab] and sum(inside[k] for k in kids[lab]) != 1:
                rep.add(("children", lab, [k for k in kids[lab] if inside[k]], pts))
                break
    return rep


def _last(label: str) -> str:
    # last (digits, letter) component of a non-empty label
    i = len(label) - 1
    while i > 0 and label[i - 1].isdigit():
        i -= 1
    return label[i:]


# ---------------------------------------------------------------------------
# projection closure and the baseline CAD


class ClosureTooLarge(RuntimeError):
    pass


def open_mc_closure(polys: Iterable[Poly], cap: int = 400) -> frozenset:
    """Smallest set containing the irreducible factors of ``polys`` and closed
    under the open McCallum projection (pairwise over each level)."""
    closure: set[Poly] = set()
    for p in polys:
        closure.update(q for q in factors(p) if not q.is_constant())
    if not closure:
        return frozenset()
    top = max(p.level for p in closure)
    for k in range(top, 1, -1):
        level = sorted((p for p in closure if p.level == k), key=poly_key)
        for i, p in enumerate(level):
            closure.update(proj_open_mc(p))
            for q in level[i + 1 :]:
                closure.update(proj_open_mc(p, (q,)))
            if len(closure) > cap:
                raise ClosureTooLarge(f"projection closure exceeds {cap} polynomials")
    return frozenset(closure)


def verify_bpolys_in_closure(tree: NuCADTree, F: Formula, cap: int = 400) -> VerificationReport:
    """Every bound polynomial of every cell lies in the projection closure of
    the formula's factors."""
    rep = VerificationReport("bpolys_in_closure")
    try:
        closure = open_mc_closure(factors_of_formula(F), cap)
    except ClosureTooLarge as e:
        rep.add(str(e))
        return rep
    for lab, cell in tree.cells.items():
        rep.samples += 1
        for b in sorted(bound_polys(cell), key=poly_key):
            if b not in closure:
                rep.add((lab, b.to_text(tree.variables)))
    return rep


def _sorted_roots(polys: Sequence[Poly], prefix: tuple) -> list[IsolatingInterval]:
    roots: list[IsolatingInterval] = []
    for p in polys:
        c = specialize(p, prefix)
        if not c:
            continue
        for lo, hi in isolate_dense(c):
            r = IsolatingInterval(lo, hi, c)
            # insertion into the sorted list, dropping duplicates
            pos = len(roots)
            dup = False
            for j, s in enumerate(roots):
                cmp = compare_roots(r, s)
                if cmp == 0:
                    dup = True
                    break
                if cmp < 0:
                    pos = j
                    break
            if not dup:
                roots.insert(pos, r)
    return roots


def build_open_cad(F: Formula, cap: int = 400) -> int:
    """Number of open cells of the classical open CAD of F (n <= 3)."""
    n = F.n
    if n > 3:
        raise ValueError("the baseline CAD supports at most 3 variables")
    closure = open_mc_closure(factors_of_formula(F), cap)
    by_level = {k: sorted((p for p in closure if p.level == k), key=poly_key) for k in range(1, n + 1)}

    def count(prefix: tuple, k: int) -> int:
        if k > n:
            return 1
        roots = _sorted_roots(by_level[k], prefix)
        bounds = [None] + roots + [None]
        total = 0
        for lo, hi in zip(bounds, bounds[1:]):
            total += count(prefix + (rational_between_bounds(lo, hi),), k + 1)
        return total

    return count((), 1)
