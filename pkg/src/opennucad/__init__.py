"""Open NuCAD construction: truth-invariant non-uniform cylindrical
algebraic decompositions of R^n into open cells, built by model-based
splitting."""

from .formula import Formula, ParseError, evaluate, factors_of_formula, parse_formula
from .nucad import NuCADTree, SplitPolicy, build, dumps, loads, locate, read_tree, stats, write_tree
from .polynomial import Poly, discriminant, factors, parse_poly, proj_open_mc, resultant

__version__ = "0.1.0"


def clear_caches() -> None:
    """Drop the memo tables for projections, factorizations and roots."""
    from . import onecell, polynomial, realroots

    for fn in (
        polynomial.specialize,
        polynomial.resultant,
        polynomial.discriminant,
        polynomial.factors,
        polynomial.proj_open_mc,
        realroots._sqf_part,
        realroots.isolate_dense,
        onecell.realize_section,
    ):
        fn.cache_clear()


__all__ = [
    "Formula",
    "NuCADTree",
    "ParseError",
    "Poly",
    "SplitPolicy",
    "build",
    "clear_caches",
    "discriminant",
    "dumps",
    "evaluate",
    "factors",
    "factors_of_formula",
    "loads",
    "locate",
    "parse_formula",
    "parse_poly",
    "proj_open_mc",
    "read_tree",
    "resultant",
    "stats",
    "write_tree",
]
