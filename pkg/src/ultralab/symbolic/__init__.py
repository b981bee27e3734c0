"""Exact-differentiation expression engine."""

from __future__ import annotations

from .derivatives import DerivativeTable, differentiate_multi
from .expr import (
    EXPANSION_BUDGET,
    ONE,
    ZERO,
    Const,
    Cos,
    Exp,
    Expr,
    Func,
    GBump,
    I,
    Log,
    Pow,
    Prod,
    Sin,
    Sum,
    Var,
    as_expr,
    count_terms,
    differentiate,
    evaluate,
    evaluate_at,
    gbump_profile,
    negate,
    simplify,
    substitute,
    variables,
    walk,
)
from .multiindex import MultiIndex
from .parser import DerivativeMarker, Parser, parse

__all__ = [
    "EXPANSION_BUDGET",
    "ONE",
    "ZERO",
    "I",
    "Const",
    "Cos",
    "DerivativeMarker",
    "DerivativeTable",
    "Exp",
    "Expr",
    "Func",
    "GBump",
    "Log",
    "MultiIndex",
    "Parser",
    "Pow",
    "Prod",
    "Sin",
    "Sum",
    "Var",
    "as_expr",
    "count_terms",
    "differentiate",
    "differentiate_multi",
    "evaluate",
    "evaluate_at",
    "gbump_profile",
    "negate",
    "parse",
    "simplify",
    "substitute",
    "variables",
    "walk",
]
