from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opennucad.formula import (
    And,
    Atom,
    Const,
    Or,
    ParseError,
    atoms_of,
    choose_Q,
    evaluate,
    factors_of_formula,
    parse_formula,
)
from opennucad.polynomial import PolynomialError, parse_poly

EXAMPLE = "vars x, y; 16y - 16x^2 - 8x - 1 > 0 /\\ x^2 + y^2 - 1 > 0"
XY = ["x", "y"]
F1 = parse_poly("16y - 16x^2 - 8x - 1", XY)
F2 = parse_poly("x^2 + y^2 - 1", XY)


def test_parse_example():
    F = parse_formula(EXAMPLE)
    assert F.variables == ("x", "y")
    assert isinstance(F.root, And)
    assert [a.poly for a in atoms_of(F.root)] == [F1, F2]
    assert all(a.rel == ">" for a in atoms_of(F.root))


def test_atoms_are_normalized():
    F = parse_formula("vars x; 4 - 2x >= 0")
    (a,) = atoms_of(F.root)
    assert a.poly == parse_poly("x - 2", ["x"]) and a.rel == "<="
    F = parse_formula("vars x, y; x^2 < y^2")
    (a,) = atoms_of(F.root)
    assert a.poly == parse_poly("y^2 - x^2", XY) and a.rel == ">"


def test_negation_and_constants():
    F = parse_formula("vars x; ~(x > 0 \\/ x < -1)")
    assert isinstance(F.root, And)
    assert {a.rel for a in atoms_of(F.root)} == {"<=", ">="}
    assert parse_formula("vars x; 0 < 1").root == Const(True)
    assert parse_formula("vars x; x > 0 /\\ 1 < 0").root == Const(False)
    assert parse_formula("vars x; x != 0").root == parse_formula("vars x; x /= 0").root


def test_parenthesized_polynomials_and_formulas():
    a = parse_formula("vars x, y; ((x+1)^2 > y)")
    b = parse_formula("vars x, y; x^2 + 2x + 1 - y > 0")
    assert a.root == b.root
    c = parse_formula("vars x, y; (x > 0 \\/ y > 0) /\\ (x+y) < 3")
    assert isinstance(c.root, And) and isinstance(c.root.args[0], Or)


def test_round_trip_text():
    for text in [EXAMPLE, "vars x, y, z; (x > 0 \\/ y <= 1) /\\ z /= x*y", "vars x; 0 < 1"]:
        F = parse_formula(text)
        assert parse_formula(F.to_text()) == F


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("vars x; x > > 0", 1, 13),
        ("vars x;\nx + y > 0", 2, 5),
        ("vars x; x > 0.5", 1, 14),
        ("x > 0", 1, 1),
        ("vars x, x; x > 0", 1, 9),
        ("vars x; (x > 0", 1, 15),
    ],
)
def test_parse_errors_report_position(text, line, column):
    with pytest.raises(ParseError) as err:
        parse_formula(text)
    assert (err.value.line, err.value.column) == (line, column)


def test_degenerate_atom_folds():
    # 0 = 0 is a constant atom and folds away
    assert parse_formula("vars x; x - x = 0").root == Const(True)


def test_evaluate():
    F = parse_formula(EXAMPLE)
    assert evaluate(F, (0, 0)) is False
    assert evaluate(F, (Fraction(-3, 2), 2)) is True
    assert evaluate(F, (0, 2)) is True
    # on the curve f1 = 0 the strict atom is false
    assert evaluate(F, (0, Fraction(1, 16))) is False


def test_factors_of_formula():
    F = parse_formula("vars x, y; (x^2 - 1)*y > 0 /\\ y^3 < 2")
    fs = factors_of_formula(F)
    assert set(fs) == {parse_poly(t, XY) for t in ["x - 1", "x + 1", "y", "y^3 - 2"]}
    with pytest.raises(PolynomialError):
        factors_of_formula(Atom(parse_poly("0", XY), ">"))


def test_choose_q_example():
    F = parse_formula(EXAMPLE)
    assert choose_Q(F, (0, 0), set()) == (F1,)
    assert choose_Q(F, (0, 1), {F1}) == (F2,)
    assert choose_Q(F, (0, 0), {F1}) == ()
    assert choose_Q(F, (0, 1), set(), "full") == (F1, F2)
    assert choose_Q(F, (0, 0), {F1, F2}, "full") == ()
    with pytest.raises(ValueError):
        choose_Q(F, (0, 0), set(), "random")


def test_choose_q_prunes_unneeded_atoms():
    # at (0, 2) the second atom alone decides the disjunction
    F = parse_formula("vars x, y; y^2 - x - 9 > 0 \\/ y - 1 > 0")
    Q = choose_Q(F, (0, 2), set())
    assert Q == (parse_poly("y - 1", XY),)


def test_choose_q_decides_truth():
    F = parse_formula("vars x, y; x > 0 /\\ (y < x \\/ y > 3)")
    for pt in [(1, 0), (-1, 5), (2, 4), (1, 2)]:
        Q = choose_Q(F, pt, set())
        # pinning Q must fix the truth value of F under the sample's signs
        pinned = set(Q)
        value = _eval_pinned(F.root, pinned, pt)
        assert value == evaluate(F, pt)


def _eval_pinned(node, pinned, pt):
    if isinstance(node, Atom):
        from opennucad.polynomial import factors

        if set(factors(node.poly)) <= pinned:
            return node.holds(node.poly.sign_at([Fraction(v) for v in pt]))
        return None
    if isinstance(node, Const):
        return node.value
    vals = [_eval_pinned(a, pinned, pt) for a in node.args]
    if isinstance(node, And):
        return False if False in vals else (None if None in vals else True)
    return True if True in vals else (None if None in vals else False)


@settings(max_examples=60, deadline=None)
@given(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4))
def test_negation_is_complement(a, b, c):
    text = f"x^2 + {a}*x*y - {b} > 0 \\/ y - {c} <= 0"
    F = parse_formula(f"vars x, y; {text}")
    G = parse_formula(f"vars x, y; ~({text})")
    for pt in [(0, 0), (1, -2), (Fraction(1, 2), 3), (-3, 1)]:
        assert evaluate(F, pt) != evaluate(G, pt)
