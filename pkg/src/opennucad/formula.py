"""Quantifier-free Tarski formulas over integer polynomials.

Input grammar (whitespace-insensitive)::

    input   := "vars" ident ("," ident)* ";" formula
    formula := conj ("\\/" conj)*
    conj    := unit ("/\\" unit)*
    unit    := "~" unit | "(" formula ")" | atom
    atom    := poly rel poly
    rel     := "<" | "<=" | ">" | ">=" | "=" | "/="

Declaration order fixes the variable order: the last declared variable is
the main variable.  Parsed formulas are kept in a normal form: atoms read
``p rel 0`` with p primitive and of positive leading coefficient,
negations are pushed into the relations, nested conjunctions and
disjunctions are flattened, and constant atoms are folded away.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .polynomial import Poly, PolynomialError, factors, normalize, poly_key

__all__ = [
    "Atom",
    "And",
    "Or",
    "Const",
    "Formula",
    "ParseError",
    "parse_formula",
    "evaluate",
    "factors_of_formula",
    "choose_Q",
    "atoms_of",
]

_FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "=", "/=": "/="}
_NEGATE = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "=": "/=", "/=": "="}
_HOLDS = {
    "<": lambda s: s < 0,
    "<=": lambda s: s <= 0,
    ">": lambda s: s > 0,
    ">=": lambda s: s >= 0,
    "=": lambda s: s == 0,
    "/=": lambda s: s != 0,
}


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass(frozen=True)
class Atom:
    poly: Poly
    rel: str

    def holds(self, sign: int) -> bool:
        return _HOLDS[self.rel](sign)


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


Node = Union[Atom, Const, And, Or]


def make_atom(p: Poly, rel: str) -> Node:
    if rel not in _HOLDS:
        raise ValueError(f"unknown relation {rel!r}")
    if p.is_constant():
        c = p.constant_value()
        return Const(_HOLDS[rel]((c > 0) - (c < 0)))
    q = normalize(p)
    if q.leading_term()[1] * p.leading_term()[1] < 0:
        rel = _FLIP[rel]
    return Atom(q, rel)


def _junction(cls, args: Iterable[Node]) -> Node:
    absorbing = cls is Or  # True absorbs Or, False absorbs And
    flat = []
    for a in args:
        if isinstance(a, Const):
            if a.value == absorbing:
                return Const(absorbing)
            continue
        if isinstance(a, cls):
            flat.extend(a.args)
        else:
            flat.append(a)
    if not flat:
        return Const(not absorbing)
    if len(flat) == 1:
        return flat[0]
    return cls(tuple(flat))


def conj(*args: Node) -> Node:
    return _junction(And, args)


def disj(*args: Node) -> Node:
    return _junction(Or, args)


def negate(node: Node) -> Node:
    if isinstance(node, Atom):
        return Atom(node.poly, _NEGATE[node.rel])
    if isinstance(node, Const):
        return Const(not node.value)
    if isinstance(node, And):
        return disj(*(negate(a) for a in node.args))
    return conj(*(negate(a) for a in node.args))


@dataclass(frozen=True)
class Formula:
    variables: tuple[str, ...]
    root: Node

    @property
    def n(self) -> int:
        return len(self.variables)

    def to_text(self) -> str:
        return f"vars {', '.join(self.variables)}; {_node_text(self.root, self.variables)}"

    def __str__(self) -> str:
        return self.to_text()


def _node_text(node: Node, names: Sequence[str]) -> str:
    if isinstance(node, Atom):
        return f"{node.poly.to_text(names)} {node.rel} 0"
    if isinstance(node, Const):
        return "0 < 1" if node.value else "1 < 0"
    if isinstance(node, And):
        parts = []
        for a in node.args:
            t = _node_text(a, names)
            parts.append(f"({t})" if isinstance(a, Or) else t)
        return " /\\ ".join(parts)
    return " \\/ ".join(_node_text(a, names) for a in node.args)


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<num>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>/\\|\\/|<=|>=|/=|!=|[<>=~()+\-*^,;./])"
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws":
            for i in range(pos, m.end()):
                if text[i] == "\n":
                    line, line_start = line + 1, i + 1
        else:
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("end", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, names: Optional[list[str]] = None):
        self.toks = _tokenize(text)
        self.i = 0
        self.names = names or []

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[_Tok] = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def take(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "ident"):
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.take(text):
            got = self.tok.text or "end of input"
            self.error(f"expected {text!r}, got {got!r}")

    def expect_end(self):
        if self.tok.kind != "end":
            self.error(f"unexpected {self.tok.text!r}")

    # top level --------------------------------------------------------

    def input(self) -> Formula:
        if not (self.tok.kind == "ident" and self.tok.text == "vars"):
            self.error("expected 'vars' declaration")
        self.i += 1
        names = [self.ident()]
        while self.take(","):
            tok = self.tok
            name = self.ident()
            if name in names:
                self.error(f"duplicate variable {name!r}", tok)
            names.append(name)
        self.expect(";")
        self.names = names
        root = self.formula()
        self.expect_end()
        return Formula(tuple(names), root)

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error("expected a variable name")
        name = self.tok.text
        self.i += 1
        return name

    def formula(self) -> Node:
        args = [self.conj()]
        while self.take("\\/"):
            args.append(self.conj())
        return disj(*args)

    def conj(self) -> Node:
        args = [self.unit()]
        while self.take("/\\"):
            args.append(self.unit())
        return conj(*args)

    def unit(self) -> Node:
        if self.take("~"):
            return negate(self.unit())
        if self.tok.text != "(":
            return self.atom()
        # "(" opens either a subformula or a parenthesized polynomial
        save = self.i
        first: Optional[ParseError] = None
        self.i += 1
        try:
            node = self.formula()
            self.expect(")")
            if self.tok.text not in _HOLDS and self.tok.text not in ("+", "-", "*", "^", "!=", "("):
                return node
        except ParseError as e:
            first = e
        self.i = save
        try:
            return self.atom()
        except ParseError as e:
            if first is not None and (first.line, first.column) > (e.line, e.column):
                raise first from None
            raise

    def atom(self) -> Node:
        lhs = self.poly()
        tok = self.tok
        rel = tok.text
        if rel == "!=":
            rel = "/="
        if tok.kind != "op" or rel not in _HOLDS:
            self.error(f"expected a relation, got {tok.text or 'end of input'!r}")
        self.i += 1
        rhs = self.poly()
        return make_atom(lhs - rhs, rel)

    # polynomials --------------------------------------------------------

    def poly(self) -> Poly:
        n = len(self.names)
        if self.take("-"):
            acc = -self.term()
        else:
            self.take("+")
            acc = self.term()
        while True:
            if self.take("+"):
                acc = acc + self.term()
            elif self.take("-"):
                acc = acc - self.term()
            else:
                break
        return acc if isinstance(acc, Poly) else Poly.const(n, acc)

    def term(self) -> Poly:
        acc = self.factor()
        while True:
            if self.take("*"):
                acc = acc * self.factor()
            elif self.tok.kind in ("num", "ident") or self.tok.text == "(":
                acc = acc * self.factor()
            else:
                return acc

    def factor(self) -> Poly:
        base = self.base()
        if self.take("^"):
            if self.tok.kind != "num":
                self.error("expected a nonnegative integer exponent")
            k = int(self.tok.text)
            self.i += 1
            return base ** k
        return base

    def base(self) -> Poly:
        n = len(self.names)
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            if self.tok.text in (".", "/") and self.tok.text != "/=":
                self.error("non-integer coefficient (clear denominators first)")
            return Poly.const(n, int(tok.text))
        if tok.kind == "ident":
            if tok.text not in self.names:
                self.error(f"undeclared variable {tok.text!r}")
            self.i += 1
            return Poly.var(n, self.names.index(tok.text))
        if self.take("("):
            p = self.poly()
            self.expect(")")
            return p
        if self.take("-"):
            return -self.factor()
        self.error(f"unexpected {tok.text or 'end of input'!r}")


def parse_formula(text: str) -> Formula:
    """Parse ``vars ...; formula`` text into a normalized :class:`Formula`."""
    return _Parser(text).input()


# ---------------------------------------------------------------------------
# semantics


def atoms_of(node: Node) -> list[Atom]:
    if isinstance(node, Atom):
        return [node]
    if isinstance(node, Const):
        return []
    out = []
    for a in node.args:
        out.extend(atoms_of(a))
    return out


def _root(F) -> Node:
    return F.root if isinstance(F, Formula) else F


def evaluate(F: Formula | Node, point: Sequence[Fraction]) -> bool:
    """Exact truth value of F at a rational point."""
    point = [Fraction(v) for v in point]
    return _eval3(_root(F), lambda a: a.holds(a.poly.sign_at(point)))


def _eval3(node: Node, value) -> Optional[bool]:
    # three-valued: value(atom) returns True, False or None (unknown)
    if isinstance(node, Atom):
        return value(node)
    if isinstance(node, Const):
        return node.value
    is_and = isinstance(node, And)
    unknown = False
    for a in node.args:
        v = _eval3(a, value)
        if v is None:
            unknown = True
        elif v != is_and:
            return v
    return None if unknown else is_and


def factors_of_formula(F: Formula | Node) -> tuple[Poly, ...]:
    """Irreducible factors of all atom polynomials, canonically ordered."""
    out: set[Poly] = set()
    for a in atoms_of(_root(F)):
        if a.poly.is_zero():
            raise PolynomialError("degenerate atom with the zero polynomial")
        out.update(factors(a.poly))
    return tuple(sorted(out, key=poly_key))


def choose_Q(
    F: Formula | Node,
    alpha: Sequence[Fraction],
    P: Iterable[Poly],
    policy: str = "greedy",
) -> tuple[Poly, ...]:
    """Polynomials whose sign-invariance, together with P, fixes the truth of F
    on any connected region around ``alpha``.

    ``full`` returns every formula factor outside P.  ``greedy`` pins atoms
    whose factors are already in P, then adds undecided atoms (lowest level,
    then lowest degree, then input order) until F is decided, and finally
    drops any added atom that turned out to be unnecessary.
    """
    root = _root(F)
    P = frozenset(P)
    alpha = [Fraction(v) for v in alpha]
    atoms = atoms_of(root)
    afactors = {a: frozenset(factors(a.poly)) for a in atoms}

    def decided(pinned: frozenset) -> bool:
        def value(a: Atom):
            if afactors[a] <= pinned:
                return a.holds(a.poly.sign_at(alpha))
            return None

        return _eval3(root, value) is not None

    if decided(P):
        return ()
    if policy == "full":
        return tuple(f for f in factors_of_formula(root) if f not in P)
    if policy != "greedy":
        raise ValueError(f"unknown Q-choice policy {policy!r}")

    order = {a: i for i, a in reversed(list(enumerate(atoms)))}
    candidates = sorted(
        (a for a in order if not afactors[a] <= P),
        key=lambda a: (a.poly.level, a.poly.total_degree(), order[a]),
    )
    chosen: list[Atom] = []
    pinned = P
    for a in candidates:
        chosen.append(a)
        pinned = pinned | afactors[a]
        if decided(pinned):
            break
    for a in list(reversed(chosen)):
        rest = [b for b in chosen if b != a]
        trial = P.union(*(afactors[b] for b in rest)) if rest else P
        if decided(trial):
            chosen = rest
    Q = set().union(*(afactors[a] for a in chosen)) - P
    return tuple(sorted(Q, key=poly_key))
