"""Model-based open cylindrical cells.

An :class:`OpenCell` stores, for every level i, a lower and an upper
section bound.  A bound is either infinite (``None``) or a
:class:`Section` ``(f, k)`` meaning "the k-th smallest real root of f in
x_i over the current x_1..x_{i-1}".  Every cell carries a rational sample
point inside it and a set P of polynomials known to have constant nonzero
sign on the whole cell.

Merging a polynomial refines a cell around its sample so that the
polynomial becomes sign-invariant.  The refinement follows the single
open cell construction: project with the open McCallum operator against
the current bounds of the same level, merge the projection factors
recursively, then tighten the level bounds to the nearest roots around
the sample.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence, Union

from .polynomial import Poly, poly_key, proj_open_mc, specialize
from .realroots import (
    IsolatingInterval,
    compare_roots,
    isolate_dense,
    rational_between_bounds,
    root_position,
)

__all__ = [
    "Section",
    "OpenCell",
    "MergeFail",
    "Membership",
    "universe_cell",
    "cell_contains",
    "cell_position",
    "merge_poly",
    "merge_set",
    "realize_bound",
    "realize_section",
    "is_nullified",
    "fiber",
    "choose_in_fiber",
    "exact_point",
    "bound_polys",
]


class CellError(RuntimeError):
    """A cell's bound data does not match its geometry."""


@dataclass(frozen=True)
class Section:
    poly: Poly
    index: int


Bound = Optional[Section]


@dataclass(frozen=True)
class OpenCell:
    bounds: tuple[tuple[Bound, Bound], ...]
    sample: tuple[Fraction, ...]
    P: frozenset = frozenset()
    label: str = ""

    @property
    def n(self) -> int:
        return len(self.bounds)


@dataclass(frozen=True)
class MergeFail:
    poly: Poly


class Membership(Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    BOUNDARY = "boundary"


def universe_cell(n: int, alpha: Sequence[Fraction]) -> OpenCell:
    if len(alpha) != n:
        raise ValueError("sample must have one coordinate per variable")
    return OpenCell(((None, None),) * n, tuple(Fraction(a) for a in alpha), frozenset(), "")


def bound_polys(cell: OpenCell) -> set[Poly]:
    return {s.poly for pair in cell.bounds for s in pair if s is not None}


def exact_point(r: Fraction) -> IsolatingInterval:
    r = Fraction(r)
    return IsolatingInterval(r, r, (-r.numerator, r.denominator))


def is_nullified(p: Poly, prefix: Sequence[Fraction]) -> bool:
    """True when p vanishes identically on the fiber over ``prefix``."""
    return not specialize(p, tuple(prefix))


@lru_cache(maxsize=1 << 16)
def realize_section(sec: Section, prefix: tuple[Fraction, ...]) -> IsolatingInterval:
    c = specialize(sec.poly, prefix)
    if not c:
        raise CellError(f"bound polynomial {sec.poly} is nullified at {prefix}")
    roots = isolate_dense(c)
    if not 1 <= sec.index <= len(roots):
        raise CellError(f"root index {sec.index} out of range for {sec.poly} at {prefix}")
    lo, hi = roots[sec.index - 1]
    return IsolatingInterval(lo, hi, c)


def fiber(bounds, i: int, prefix: Sequence[Fraction]):
    """Realized (lower, upper) bounds at level i (1-based) over ``prefix``."""
    prefix = tuple(prefix[: i - 1])
    lo, hi = bounds[i - 1]
    return (
        None if lo is None else realize_section(lo, prefix),
        None if hi is None else realize_section(hi, prefix),
    )


def realize_bound(cell: OpenCell, i: int, side: str) -> Optional[IsolatingInterval]:
    """Isolating interval of the level-i bound at the sample prefix (None = infinite)."""
    lo, hi = fiber(cell.bounds, i, cell.sample)
    return lo if side == "lower" else hi


def choose_in_fiber(bounds, prefix: Sequence[Fraction], start: int, keep: Sequence[Fraction] = ()):
    """Complete ``prefix`` (length start-1) to a point of the cell given by
    ``bounds``.  Coordinates from ``keep`` are reused while they stay strictly
    inside their fiber; otherwise the simplest rational is taken.
    """
    point = list(prefix[: start - 1])
    for j in range(start, len(bounds) + 1):
        lo, hi = fiber(bounds, j, point)
        if j - 1 < len(keep):
            v = keep[j - 1]
            if (lo is None or lo.compare(v) > 0) and (hi is None or hi.compare(v) < 0):
                point.append(v)
                continue
        point.append(rational_between_bounds(lo, hi))
    return tuple(point)


def cell_position(cell: OpenCell, point: Sequence[Fraction]) -> tuple[Membership, int, str]:
    """Membership of ``point`` plus, when it is not inside, the first level
    where it leaves the cell and the side ("L" below, "U" above)."""
    point = tuple(Fraction(v) for v in point)
    for i, (lo, hi) in enumerate(cell.bounds, start=1):
        prefix = point[: i - 1]
        v = point[i - 1]
        if lo is not None:
            c = specialize(lo.poly, prefix)
            if not c:
                raise CellError(f"bound polynomial {lo.poly} nullified at {prefix}")
            below, on = root_position(c, v)
            if on and below == lo.index - 1:
                return Membership.BOUNDARY, i, "L"
            if below < lo.index:
                return Membership.OUTSIDE, i, "L"
        if hi is not None:
            c = specialize(hi.poly, prefix)
            if not c:
                raise CellError(f"bound polynomial {hi.poly} nullified at {prefix}")
            below, on = root_position(c, v)
            if on and below == hi.index - 1:
                return Membership.BOUNDARY, i, "U"
            if below >= hi.index:
                return Membership.OUTSIDE, i, "U"
    return Membership.INSIDE, 0, ""


def cell_contains(cell: OpenCell, point: Sequence[Fraction]) -> Membership:
    return cell_position(cell, point)[0]


def _nudge_below_root(cell: OpenCell, k: int, c: tuple, below: int) -> OpenCell:
    # the sample sits on a root of c at level k: move alpha_k down, strictly
    # between the next lower root (or the lower bound) and its old value
    sample = cell.sample
    prefix = sample[: k - 1]
    lo_bound, _ = fiber(cell.bounds, k, prefix)
    lo = lo_bound
    if below > 0:
        r = IsolatingInterval(*isolate_dense(c)[below - 1], c)
        if lo is None or compare_roots(r, lo) > 0:
            lo = r
    gamma = rational_between_bounds(lo, exact_point(sample[k - 1]))
    new = choose_in_fiber(cell.bounds, prefix + (gamma,), k + 1, keep=sample)
    return replace(cell, sample=new)


def merge_poly(cell: OpenCell, p: Poly) -> Union[OpenCell, MergeFail]:
    """Refine ``cell`` around its sample so that p is sign-invariant on it."""
    if p in cell.P or p.is_constant():
        return cell
    k = p.level
    if is_nullified(p, cell.sample[: k - 1]):
        return MergeFail(p)
    neighbors = tuple(
        sorted({s.poly for s in cell.bounds[k - 1] if s is not None and s.poly != p}, key=poly_key)
    )
    for q in proj_open_mc(p, neighbors):
        if q in cell.P:
            continue
        out = merge_poly(cell, q)
        if isinstance(out, MergeFail):
            return out
        cell = out
    prefix = cell.sample[: k - 1]
    c = specialize(p, prefix)
    if not c:
        return MergeFail(p)
    below, on = root_position(c, cell.sample[k - 1])
    if on:
        cell = _nudge_below_root(cell, k, c, below)
        below, on = root_position(c, cell.sample[k - 1])
    roots = isolate_dense(c)
    lo_cur, hi_cur = fiber(cell.bounds, k, prefix)
    lower, upper = cell.bounds[k - 1]
    if below > 0:
        r = IsolatingInterval(*roots[below - 1], c)
        if lo_cur is None or compare_roots(r, lo_cur) > 0:
            lower = Section(p, below)
    if below < len(roots):
        r = IsolatingInterval(*roots[below], c)
        if hi_cur is None or compare_roots(r, hi_cur) < 0:
            upper = Section(p, below + 1)
    bounds = cell.bounds[: k - 1] + ((lower, upper),) + cell.bounds[k:]
    return replace(cell, bounds=bounds, P=cell.P | {p})


def merge_set(cell: OpenCell, Q) -> Union[OpenCell, MergeFail]:
    """Merge every polynomial of Q, lowest level first."""
    for p in sorted(set(Q), key=poly_key):
        out = merge_poly(cell, p)
        if isinstance(out, MergeFail):
            return out
        cell = out
    return cell
