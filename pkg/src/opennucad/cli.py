"""Command line interface.

Exit codes: 0 success, 1 verification failure, 2 bad input (parse error,
unreadable tree, wrong arity, plot of a non-planar tree), 3 cell safety cap
exceeded, 4 query point on a cell boundary.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .formula import ParseError, parse_formula
from .nucad import CellLimitExceeded, NuCADTree, SplitPolicy, build, dumps, locate, read_tree, stats
from .oracle import verify_bpolys_in_closure, verify_truth_invariance, verify_weak_decomposition

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_BOUNDARY = 4

# options whose values may legitimately start with "-"
_VALUE_OPTIONS = ("-p", "--point", "--window")


class InputError(Exception):
    pass


def _rationals(text: str, what: str) -> list[Fraction]:
    try:
        return [Fraction(t.strip()) for t in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad {what} {text!r}: expected comma-separated rationals like -3/2,2") from None


def _load(path: str) -> NuCADTree:
    try:
        return read_tree(path)
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise InputError(f"cannot read tree {path}: {e}") from None


def cmd_build(args) -> int:
    try:
        with open(args.formula, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(str(e)) from None
    try:
        F = parse_formula(text)
    except ParseError as e:
        print(f"{args.formula}: {e}", file=sys.stderr)
        return EXIT_INPUT
    policy = SplitPolicy(args.policy, args.workers, args.cap)
    try:
        tree = build(F, policy)
    except CellLimitExceeded as e:
        print(f"aborted: {e}", file=sys.stderr)
        return EXIT_CAP
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(dumps(tree))
    s = stats(tree)
    print(f"leaves: {s['leaves']}")
    print(f"cells: {s['cells']}")
    print(f"factors: {s['factors']}")
    return EXIT_OK


def cmd_query(args) -> int:
    tree = _load(args.tree)
    point = _rationals(args.point, "point")
    if len(point) != tree.n:
        raise InputError(f"point has {len(point)} coordinates, tree has {tree.n} variables")
    loc = locate(tree, point)
    if loc.boundary:
        print("boundary: point lies on a cell boundary")
        return EXIT_BOUNDARY
    print(f"{loc.label or '(root)'} {'true' if loc.truth else 'false'}")
    return EXIT_OK


def cmd_verify(args) -> int:
    tree = _load(args.tree)
    F = tree.formula
    reports = [
        verify_truth_invariance(tree, F, args.samples, args.seed),
        verify_weak_decomposition(tree, args.samples, args.seed),
        verify_bpolys_in_closure(tree, F),
    ]
    print(json.dumps([r.to_dict() for r in reports], indent=2))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def cmd_stats(args) -> int:
    s = stats(_load(args.tree))
    print(", ".join(f"{k}: {s[k]}" for k in ("cells", "leaves", "factors", "x_cells", "depth")))
    return EXIT_OK


def _color(label: str, truth: bool) -> str:
    hue = int.from_bytes(hashlib.sha256(label.encode()).digest()[:2], "big") % 360
    sat, light = (70, 50) if truth else (30, 70)
    return f"hsl({hue},{sat}%,{light}%)"


def render_svg(tree: NuCADTree, window: Sequence[Fraction], grid: int) -> str:
    """Rasterize the leaves of a planar tree by locating grid points."""
    x0, x1, y0, y1 = window
    dx, dy = (x1 - x0) / grid, (y1 - y0) / grid
    rows: list[list[str]] = [[""] * grid for _ in range(grid)]
    for i in range(grid):
        x = x0 + dx * i + dx / 2
        for j in range(grid):
            y = y1 - dy * j - dy / 2
            loc = locate(tree, (x, y))
            rows[j][i] = "#808080" if loc.boundary else _color(loc.label, loc.truth)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{grid}" height="{grid}" '
        f'viewBox="0 0 {grid} {grid}" shape-rendering="crispEdges">',
        f"<title>{_escape(tree.formula.to_text())} on [{x0},{x1}]x[{y0},{y1}]</title>",
    ]
    for j, row in enumerate(rows):
        start = 0
        for i in range(1, grid + 1):
            if i == grid or row[i] != row[start]:
                out.append(f'<rect x="{start}" y="{j}" width="{i - start}" height="1" fill="{row[start]}"/>')
                start = i
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def cmd_plot(args) -> int:
    tree = _load(args.tree)
    if tree.n != 2:
        raise InputError(f"plot needs a tree in 2 variables, this one has {tree.n}")
    window = _rationals(args.window, "window")
    if len(window) != 4 or window[0] >= window[1] or window[2] >= window[3]:
        raise InputError("window must be xmin,xmax,ymin,ymax with xmin<xmax and ymin<ymax")
    if args.grid < 1:
        raise InputError("grid must be positive")
    svg = render_svg(tree, window, args.grid)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(svg)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="opennucad", description="Build and query open NuCAD trees.")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a tree from a formula file")
    b.add_argument("formula")
    b.add_argument("-o", "--output", help="write the tree file here")
    b.add_argument("--policy", choices=("greedy", "full"), default="greedy")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--cap", type=int, default=100_000, help="cell safety cap")
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="locate a point")
    q.add_argument("tree")
    q.add_argument("-p", "--point", required=True, help="comma-separated rationals, e.g. -3/2,2")
    q.set_defaults(func=cmd_query)

    v = sub.add_parser("verify", help="run the sampling and closure checks")
    v.add_argument("tree")
    v.add_argument("--samples", type=int, default=10_000)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("stats", help="print tree statistics")
    s.add_argument("tree")
    s.set_defaults(func=cmd_stats)

    p = sub.add_parser("plot", help="write an SVG picture of a planar tree")
    p.add_argument("tree")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--window", default="-2,2,-2,2", help="xmin,xmax,ymin,ymax")
    p.add_argument("--grid", type=int, default=400)
    p.set_defaults(func=cmd_plot)
    return ap


def _join_values(argv: list[str]) -> list[str]:
    # let "-p -3/2,2" through argparse, which would read "-3/2,2" as a flag
    out: list[str] = []
    it = iter(argv)
    for a in it:
        if a in _VALUE_OPTIONS:
            nxt = next(it, None)
            if nxt is not None:
                a = f"{a}={nxt}" if a.startswith("--") else f"{a}{nxt}"
        out.append(a)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = make_parser().parse_args(_join_values(argv))
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
