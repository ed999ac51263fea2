import random
from fractions import Fraction

import pytest

from opennucad.formula import evaluate, parse_formula
from opennucad.nucad import (
    CellLimitExceeded,
    SplitPolicy,
    build,
    dumps,
    loads,
    locate,
    parent_label,
    parse_label,
    perturb_sample,
    split,
    stats,
)
from opennucad.onecell import Membership, OpenCell, Section, cell_contains, universe_cell
from opennucad.oracle import random_point_in_cell, verify_truth_invariance, verify_weak_decomposition
from opennucad.polynomial import parse_poly

from corpus import EXAMPLE, FIXED

XY = ["x", "y"]
F1 = parse_poly("16y - 16x^2 - 8x - 1", XY)
F2 = parse_poly("x^2 + y^2 - 1", XY)
F3 = parse_poly("256x^4 + 256x^3 + 352x^2 + 16x - 255", XY)
F4 = parse_poly("x + 1", XY)
F5 = parse_poly("x - 1", XY)
FORMULA = parse_formula(EXAMPLE)


@pytest.fixture(scope="module")
def tree():
    return build(FORMULA)


def test_parse_label():
    assert parse_label("") == []
    assert parse_label("2U1L2X") == [(2, "U"), (1, "L"), (2, "X")]
    assert parse_label("12X") == [(12, "X")]
    with pytest.raises(ValueError):
        parse_label("2Q")
    assert parent_label("2U1L2X") == "2U1L"
    assert parent_label("2X") == "" and parent_label("") is None


def test_split_policy_validation():
    with pytest.raises(ValueError):
        SplitPolicy("random")
    with pytest.raises(ValueError):
        SplitPolicy(workers=0)


def test_perturb_sample_examples():
    U = universe_cell(2, (0, 0))
    assert perturb_sample(U, parse_poly("x*y + x", XY)) == (-1, 0)
    assert perturb_sample(U, parse_poly("x^2*y - x^2", XY))[0] < 0
    D = OpenCell(((Section(parse_poly("x + 2", ["x"]), 1), None),), (Fraction(0),), frozenset())
    # a level-1 polynomial is never nullified; here x vanishes at the sample
    assert perturb_sample(D, parse_poly("x", ["x"])) == (-1,)


def test_split_root(tree):
    kids = split(tree.cells[""], FORMULA)
    assert [k.label for k in kids] == ["2X", "2U"]
    X, Up = kids
    assert X.bounds == ((None, None), (None, Section(F1, 1)))
    assert Up.bounds == ((None, None), (Section(F1, 1), None))
    assert Up.sample[1] > Fraction(1, 16)


def test_split_second_level(tree):
    kids = split(tree.cells["2U"], FORMULA)
    assert [k.label for k in kids] == ["2U2X", "2U1L", "2U1U", "2U2U"]
    byl = {k.label: k for k in kids}
    assert byl["2U2X"].bounds == ((Section(F3, 1), Section(F3, 2)), (Section(F1, 1), Section(F2, 2)))
    assert byl["2U1L"].bounds == ((None, Section(F3, 1)), (Section(F1, 1), None))
    assert byl["2U1U"].bounds == ((Section(F3, 2), None), (Section(F1, 1), None))
    assert byl["2U2U"].bounds == ((Section(F3, 1), Section(F3, 2)), (Section(F2, 2), None))
    # siblings inherit the parent's P plus the X child's lower-level factors
    assert byl["2U1L"].P == frozenset()
    assert byl["2U2U"].P == frozenset({F3, F4, F5})


def test_split_decided_cell_is_leaf(tree):
    assert split(tree.cells["2U2X"], FORMULA) == []
    assert split(tree.cells["2X"], FORMULA) == []


def test_build_example(tree):
    s = stats(tree)
    assert s == {"cells": 11, "leaves": 7, "x_cells": 4, "factors": 5, "depth": 3}
    assert set(tree.leaves()) == {"2X", "2U2X", "2U2U", "2U1L2X", "2U1L1U", "2U1U2X", "2U1U1U"}
    assert tree.cells["2X"].bounds[1][1] == Section(F1, 1)
    polys = set().union(*(c.P for c in tree.cells.values()))
    assert polys == {F1, F2, F3, F4, F5}


def test_build_trivial_and_halfline():
    T = build(parse_formula("vars x; 0 < 1"))
    assert list(T.cells) == [""] and T.truth == {"": True}
    assert stats(T) == {"cells": 1, "leaves": 1, "x_cells": 0, "factors": 0, "depth": 0}
    T = build(parse_formula("vars x; x > 0"))
    assert T.truth == {"1X": False, "1U": True}


def test_locate_examples(tree):
    assert (locate(tree, (0, 0)).label, locate(tree, (0, 0)).truth) == ("2X", False)
    loc = locate(tree, (Fraction(-3, 2), 2))
    assert (loc.label, loc.truth) == ("2U1L2X", True)
    # f1(0,2) = 31 > 0 and f2(0,2) = 3 > 0, so the formula holds there
    loc = locate(tree, (0, 2))
    assert (loc.label, loc.truth) == ("2U2U", True)
    assert locate(tree, (0, Fraction(1, 16))).boundary
    with pytest.raises(ValueError):
        locate(tree, (0,))


def test_tree_well_formed(tree):
    kids = tree.child_map()
    for lab in tree.cells:
        if lab:
            assert parent_label(lab) in tree.cells
        if lab not in tree.truth:
            xs = [k for k in kids[lab] if k.endswith("X")]
            assert xs == [f"{lab}{tree.n}X"]
        else:
            assert kids[lab] == []


def test_x_child_containment_and_child_partition(tree):
    rng = random.Random(2)
    kids = tree.child_map()
    for lab, cell in tree.cells.items():
        if not kids[lab]:
            continue
        X = tree.cells[f"{lab}{tree.n}X"]
        for _ in range(500):
            assert cell_contains(cell, random_point_in_cell(X, rng)) is Membership.INSIDE
        seen = 0
        while seen < 500:
            pt = random_point_in_cell(cell, rng)
            ms = [cell_contains(tree.cells[k], pt) for k in kids[lab]]
            if Membership.BOUNDARY in ms:
                continue
            seen += 1
            assert ms.count(Membership.INSIDE) == 1


def test_truth_invariance_on_leaves(tree):
    rng = random.Random(4)
    for lab in tree.leaves():
        for _ in range(100):
            pt = random_point_in_cell(tree.cells[lab], rng)
            assert evaluate(FORMULA, pt) == tree.truth[lab]


def test_round_trip(tree):
    text = dumps(tree)
    again = loads(text)
    assert dumps(again) == text
    assert again.cells == tree.cells and again.truth == tree.truth


def test_loads_rejects_bad_documents(tree):
    with pytest.raises(ValueError):
        loads('{"format": "something-else"}')
    text = dumps(tree).replace('"version": 1', '"version": 99')
    with pytest.raises(ValueError):
        loads(text)


def test_cell_cap():
    with pytest.raises(CellLimitExceeded):
        build(FORMULA, SplitPolicy(cell_cap=5))


@pytest.mark.parametrize("name", sorted(FIXED))
def test_worker_count_does_not_change_tree(name):
    F = parse_formula(FIXED[name])
    assert dumps(build(F, SplitPolicy(workers=1))) == dumps(build(F, SplitPolicy(workers=3)))


def test_full_policy_also_valid():
    T = build(FORMULA, SplitPolicy("full"))
    assert verify_truth_invariance(T, FORMULA, 1000, 3).passed
    assert verify_weak_decomposition(T, 1000, 3).passed


def test_split_with_failing_merge_perturbs():
    F = parse_formula("vars x, y; x*y + x > 0")
    kids = split(universe_cell(2, (0, 0)), F)
    X = kids[0]
    assert X.label == "2X" and X.sample == (-1, 0)
    # the formula's factors are x and y + 1
    assert X.bounds == (
        (None, Section(parse_poly("x", XY), 1)),
        (Section(parse_poly("y + 1", XY), 1), None),
    )
    assert [k.label for k in kids] == ["2X", "1U", "2L"]
