"""Open NuCAD trees: the Split step, the truth-invariant builder, point
location and the on-disk tree format.

A tree maps labels to cells.  The root is labelled with the empty string;
a child's label appends one component ``<level><L|U|X>`` to its parent's.
Every split cell gets one ``nX`` child containing the parent's (possibly
perturbed) sample, plus ``iL``/``iU`` siblings covering what is left below
and above the X child's level-i bounds.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

from .formula import Formula, choose_Q, evaluate, parse_formula
from .onecell import (
    Membership,
    MergeFail,
    OpenCell,
    Section,
    cell_position,
    choose_in_fiber,
    exact_point,
    fiber,
    is_nullified,
    merge_set,
    universe_cell,
)
from .polynomial import Poly, factors, leading_coeff, parse_poly, poly_key, specialize
from .realroots import IsolatingInterval, compare_roots, isolate_dense, rational_between_bounds, root_position

__all__ = [
    "SplitPolicy",
    "NuCADTree",
    "CellLimitExceeded",
    "Location",
    "parse_label",
    "perturb_sample",
    "split",
    "build",
    "locate",
    "stats",
    "dumps",
    "loads",
    "read_tree",
    "write_tree",
    "TREE_FORMAT",
    "TREE_VERSION",
]

TREE_FORMAT = "opennucad-tree"
TREE_VERSION = 1

_COMPONENT = re.compile(r"([0-9]+)([LUX])")
_LABEL = re.compile(r"(?:[0-9]+[LUX])*")


class CellLimitExceeded(RuntimeError):
    def __init__(self, cap: int, cells: int):
        super().__init__(f"cell safety cap of {cap} exceeded ({cells} cells)")
        self.cap = cap
        self.cells = cells


def parse_label(label: str) -> list[tuple[int, str]]:
    """Split a label into (level, letter) components."""
    if not _LABEL.fullmatch(label):
        raise ValueError(f"malformed label {label!r}")
    return [(int(m.group(1)), m.group(2)) for m in _COMPONENT.finditer(label)]


def parent_label(label: str) -> Optional[str]:
    if not label:
        return None
    comps = parse_label(label)
    return "".join(f"{lvl}{s}" for lvl, s in comps[:-1])


@dataclass(frozen=True)
class SplitPolicy:
    q_policy: str = "greedy"
    workers: int = 1
    cell_cap: int = 100_000

    def __post_init__(self):
        if self.q_policy not in ("greedy", "full"):
            raise ValueError(f"unknown Q policy {self.q_policy!r}")
        if self.workers < 1:
            raise ValueError("workers must be positive")


# ---------------------------------------------------------------------------
# Split


def perturb_sample(D: OpenCell, f: Poly) -> tuple[Fraction, ...]:
    """Move the sample of D off the nullification locus of f.

    Walks down through leading coefficients until a level is reached where
    nothing in the working set is nullified, then steps the sample
    coordinate there down past every root below it (staying inside D) and
    re-chooses the coordinates above.
    """
    alpha = D.sample
    L = {f}
    i = f.level
    while any(is_nullified(g, alpha[: i - 1]) for g in L):
        if i <= 1:
            raise ValueError(f"{f} vanishes identically")
        nxt: set[Poly] = set()
        for g in L:
            nxt.update(factors(leading_coeff(g, i - 1)))
        L = nxt
        i -= 1
    prefix = alpha[: i - 1]
    lo, _ = fiber(D.bounds, i, prefix)
    for g in sorted(L, key=poly_key):
        if g.level != i:
            continue
        c = specialize(g, prefix)
        below, _ = root_position(c, alpha[i - 1])
        if below == 0:
            continue
        r = IsolatingInterval(*isolate_dense(c)[below - 1], c)
        if lo is None or compare_roots(r, lo) > 0:
            lo = r
    gamma = rational_between_bounds(lo, exact_point(alpha[i - 1]))
    return choose_in_fiber(D.bounds, prefix + (gamma,), i + 1)


def split(D: OpenCell, F: Formula, policy: SplitPolicy = SplitPolicy()) -> list[OpenCell]:
    """Children of D, X child first; empty when F is truth-invariant on D."""
    Q = choose_Q(F, D.sample, D.P, policy.q_policy)
    if not Q:
        return []
    requested = set(Q)
    base = D
    while True:
        out = merge_set(base, requested)
        if isinstance(out, MergeFail):
            base = replace(base, sample=perturb_sample(base, out.poly))
            continue
        more = choose_Q(F, out.sample, out.P, policy.q_policy)
        if not more:
            break
        # the sample moved while merging and F is not yet decided there
        requested.update(more)
        base = replace(base, sample=out.sample)
    if out.bounds == D.bounds:
        # every requested polynomial is already sign-invariant on all of D
        return []
    n = D.n
    children = [replace(out, label=f"{D.label}{n}X")]
    for i in range(1, n + 1):
        (lo, hi), (lo_x, hi_x) = D.bounds[i - 1], out.bounds[i - 1]
        P = D.P | {q for q in out.P if q.level < i}
        for changed, pair, side in ((lo_x != lo, (lo, lo_x), "L"), (hi_x != hi, (hi_x, hi), "U")):
            if not changed:
                continue
            bounds = out.bounds[: i - 1] + (pair,) + D.bounds[i:]
            sample = choose_in_fiber(bounds, out.sample[: i - 1], i)
            children.append(OpenCell(bounds, sample, frozenset(P), f"{D.label}{i}{side}"))
    return children


def _split_job(args) -> list[OpenCell]:
    cell, F, policy = args
    return split(cell, F, policy)


# ---------------------------------------------------------------------------
# trees


@dataclass
class NuCADTree:
    formula: Formula
    cells: dict[str, OpenCell] = field(default_factory=dict)
    truth: dict[str, bool] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.formula.n

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.formula.variables)

    def children(self, label: str) -> list[str]:
        out = []
        for lab in self.cells:
            if lab != label and lab.startswith(label) and parent_label(lab) == label:
                out.append(lab)
        return out

    def is_leaf(self, label: str) -> bool:
        return label in self.truth

    def leaves(self) -> list[str]:
        return [lab for lab in self.cells if lab in self.truth]

    def child_map(self) -> dict[str, list[str]]:
        kids: dict[str, list[str]] = {lab: [] for lab in self.cells}
        for lab in self.cells:
            par = parent_label(lab)
            if par is not None and par in kids:
                kids[par].append(lab)
        return kids


def build(F: Formula, policy: SplitPolicy = SplitPolicy()) -> NuCADTree:
    """Split cells breadth first until F is truth-invariant on every leaf."""
    tree = NuCADTree(F)
    root = universe_cell(F.n, (Fraction(0),) * F.n)
    tree.cells[""] = root
    frontier = [root]
    pool = ProcessPoolExecutor(max_workers=policy.workers) if policy.workers > 1 else None
    try:
        while frontier:
            todo = []
            for cell in frontier:
                if cell.label.endswith("X"):
                    tree.truth[cell.label] = evaluate(F, cell.sample)
                else:
                    todo.append(cell)
            jobs = [(c, F, policy) for c in todo]
            if pool is not None and len(jobs) > 1:
                results = list(pool.map(_split_job, jobs))
            else:
                results = [_split_job(j) for j in jobs]
            frontier = []
            for cell, kids in zip(todo, results):
                if not kids:
                    tree.truth[cell.label] = evaluate(F, cell.sample)
                for kid in kids:
                    tree.cells[kid.label] = kid
                    frontier.append(kid)
                if len(tree.cells) > policy.cell_cap:
                    raise CellLimitExceeded(policy.cell_cap, len(tree.cells))
    finally:
        if pool is not None:
            pool.shutdown()
    # X children are leaves only when not refined further; fix up order
    tree.truth = {lab: tree.truth[lab] for lab in tree.cells if lab in tree.truth}
    return tree


@dataclass(frozen=True)
class Location:
    label: Optional[str]
    truth: Optional[bool]

    @property
    def boundary(self) -> bool:
        return self.label is None


BOUNDARY = Location(None, None)


def locate(tree: NuCADTree, point: Sequence) -> Location:
    """Leaf containing ``point``, or BOUNDARY if it lies on a cell boundary."""
    point = tuple(Fraction(v) for v in point)
    if len(point) != tree.n:
        raise ValueError(f"expected {tree.n} coordinates, got {len(point)}")
    label = ""
    while label not in tree.truth:
        n = tree.n
        xlab = f"{label}{n}X"
        mem, level, side = cell_position(tree.cells[xlab], point)
        if mem is Membership.BOUNDARY:
            return BOUNDARY
        if mem is Membership.INSIDE:
            label = xlab
            continue
        nxt = f"{label}{level}{side}"
        if nxt not in tree.cells:
            raise RuntimeError(f"tree has no cell {nxt!r} for point {point}")
        label = nxt
    # the root and sibling cells are entered without a membership test on
    # their own bounds; a final check guards against malformed trees
    if cell_position(tree.cells[label], point)[0] is not Membership.INSIDE:
        return BOUNDARY
    return Location(label, tree.truth[label])


def stats(tree: NuCADTree) -> dict[str, int]:
    polys = set()
    for cell in tree.cells.values():
        polys.update(cell.P)
    return {
        "cells": len(tree.cells),
        "leaves": len(tree.truth),
        "x_cells": sum(1 for lab in tree.cells if lab.endswith("X")),
        "factors": len(polys),
        "depth": max(len(parse_label(lab)) for lab in tree.cells),
    }


# ---------------------------------------------------------------------------
# tree files


def _bound_json(b: Optional[Section], inf: str, names):
    if b is None:
        return inf
    return {"poly": b.poly.to_text(names), "index": b.index}


def dumps(tree: NuCADTree) -> str:
    names = list(tree.variables)
    cells = []
    for lab, cell in tree.cells.items():
        rec = {
            "label": lab,
            "parent": parent_label(lab),
            "leaf": lab in tree.truth,
            "bounds": [
                [_bound_json(lo, "-inf", names), _bound_json(hi, "+inf", names)] for lo, hi in cell.bounds
            ],
            "sample": [str(v) for v in cell.sample],
            "P": [p.to_text(names) for p in sorted(cell.P, key=poly_key)],
        }
        if lab in tree.truth:
            rec["truth"] = tree.truth[lab]
        cells.append(rec)
    doc = {
        "format": TREE_FORMAT,
        "version": TREE_VERSION,
        "variables": names,
        "formula": tree.formula.to_text(),
        "cells": cells,
    }
    return json.dumps(doc, indent=2) + "\n"


def _bound_from(obj, names) -> Optional[Section]:
    if obj in ("-inf", "+inf"):
        return None
    return Section(parse_poly(obj["poly"], names), int(obj["index"]))


def loads(text: str) -> NuCADTree:
    doc = json.loads(text)
    if doc.get("format") != TREE_FORMAT:
        raise ValueError("not a tree file")
    if doc.get("version") != TREE_VERSION:
        raise ValueError(f"unsupported tree version {doc.get('version')}")
    names = list(doc["variables"])
    F = parse_formula(doc["formula"])
    if list(F.variables) != names:
        raise ValueError("formula variables do not match the header")
    tree = NuCADTree(F)
    for rec in doc["cells"]:
        lab = rec["label"]
        parse_label(lab)
        if len(rec["bounds"]) != len(names) or len(rec["sample"]) != len(names):
            raise ValueError(f"cell {lab!r} has the wrong dimension")
        bounds = tuple((_bound_from(lo, names), _bound_from(hi, names)) for lo, hi in rec["bounds"])
        sample = tuple(Fraction(s) for s in rec["sample"])
        P = frozenset(parse_poly(t, names) for t in rec["P"])
        tree.cells[lab] = OpenCell(bounds, sample, P, lab)
        if rec["leaf"]:
            tree.truth[lab] = bool(rec["truth"])
    return tree


def read_tree(path) -> NuCADTree:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def write_tree(tree: NuCADTree, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(tree))
