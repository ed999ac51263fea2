import random
from fractions import Fraction

import pytest

from opennucad.formula import parse_formula
from opennucad.nucad import build, parent_label
from opennucad.onecell import (
    Membership,
    MergeFail,
    OpenCell,
    Section,
    bound_polys,
    cell_contains,
    cell_position,
    merge_poly,
    merge_set,
    realize_bound,
    universe_cell,
)
from opennucad.oracle import open_mc_closure, random_point_in_cell, sturm_count
from opennucad.polynomial import parse_poly, specialize

from corpus import EXAMPLE

XY = ["x", "y"]
F1 = parse_poly("16y - 16x^2 - 8x - 1", XY)
F2 = parse_poly("x^2 + y^2 - 1", XY)
F3 = parse_poly("256x^4 + 256x^3 + 352x^2 + 16x - 255", XY)
F4 = parse_poly("x + 1", XY)
F5 = parse_poly("x - 1", XY)

C0 = universe_cell(2, (0, 0))
C1 = merge_poly(C0, F1)
# the region above the first section, sampled as the builder does
C2 = OpenCell(((None, None), (Section(F1, 1), None)), (Fraction(0), Fraction(1)), frozenset())


def test_universe_cell():
    assert C0.bounds == ((None, None), (None, None))
    assert C0.P == frozenset() and C0.label == ""
    assert universe_cell(3, (0, 0, 0)).n == 3
    with pytest.raises(ValueError):
        universe_cell(2, (0,))


def test_merge_f1_gives_c1():
    assert C1.bounds == ((None, None), (None, Section(F1, 1)))
    assert C1.P == frozenset({F1})
    assert C1.sample == (0, 0)


def test_cell_contains_examples():
    assert cell_contains(C1, (0, 0)) is Membership.INSIDE
    assert cell_contains(C1, (0, Fraction(1, 2))) is Membership.OUTSIDE
    assert cell_contains(C1, (0, Fraction(1, 16))) is Membership.BOUNDARY
    assert cell_contains(C0, (123, -7)) is Membership.INSIDE
    assert cell_position(C1, (5, 1000)) == (Membership.OUTSIDE, 2, "U")


def test_merge_f2_gives_c3():
    C3 = merge_poly(C2, F2)
    assert C3.bounds == (
        (Section(F3, 1), Section(F3, 2)),
        (Section(F1, 1), Section(F2, 2)),
    )
    assert C3.P == frozenset({F2, F3, F4, F5})
    # f2 vanishes at (0, 1), so the sample was nudged down inside the cell
    assert C3.sample == (0, Fraction(1, 2))
    assert cell_contains(C3, C3.sample) is Membership.INSIDE


def test_realize_bound():
    iv = realize_bound(C1, 2, "upper")
    assert iv.compare(Fraction(1, 16)) == 0
    assert realize_bound(C0, 1, "lower") is None
    C3 = merge_poly(C2, F2)
    iv = realize_bound(C3, 1, "upper")
    assert iv.compare(Fraction(0)) < 0 and iv.compare(Fraction(1)) > 0
    assert sturm_count(F3, iv.lower, iv.upper) == 1


def test_merge_fail_on_nullification():
    f = parse_poly("x*y + x", XY)
    assert merge_poly(C0, f) == MergeFail(f)


def test_merge_set():
    assert merge_set(C0, {F1}) == C1
    assert merge_set(C0, set()) == C0
    C3 = merge_set(C2, {F2})
    assert C3 == merge_poly(C2, F2)


def _check_cell(parent: OpenCell, cell: OpenCell, rng, n_points=500):
    signs = {p: p.sign_at(cell.sample) for p in cell.P}
    assert all(signs.values())
    for _ in range(n_points):
        pt = random_point_in_cell(cell, rng)
        assert cell_contains(cell, pt) is Membership.INSIDE
        assert cell_contains(parent, pt) is Membership.INSIDE
        for p, s in signs.items():
            assert p.sign_at(pt) == s


@pytest.mark.parametrize(
    "text",
    [
        EXAMPLE,
        "vars x, y; x*y - 1 > 0 /\\ y^2 - x^3 + x < 0",
        "vars x, y, z; x^2 + y^2 + z^2 - 1 > 0 /\\ z - x^2 - y^2 > 0",
    ],
)
def test_sampling_invariants_of_built_cells(text):
    rng = random.Random(3)
    tree = build(parse_formula(text))
    for lab, cell in tree.cells.items():
        if not lab:
            continue
        parent = tree.cells[parent_label(lab)]
        _check_cell(parent, cell, rng, 100)


def test_merge_outcome_invariants():
    rng = random.Random(5)
    C3 = merge_poly(C2, F2)
    _check_cell(C2, C3, rng)
    _check_cell(C0, C1, rng)


def test_bound_polys_in_closure_of_inputs():
    C3 = merge_poly(C2, F2)
    assert bound_polys(C3) <= open_mc_closure([F1, F2])


def test_root_counts_constant_over_base():
    rng = random.Random(11)
    C3 = merge_poly(C2, F2)
    for lo, hi in C3.bounds[1:]:
        for sec in (lo, hi):
            k = sturm_count(_uni(sec.poly, C3.sample[:1]))
            for _ in range(100):
                pt = random_point_in_cell(C3, rng)
                assert sturm_count(_uni(sec.poly, pt[:1])) == k


def _uni(p, prefix):
    return list(specialize(p, tuple(prefix)))
