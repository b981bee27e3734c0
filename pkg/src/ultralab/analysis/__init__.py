"""Norms, seminorms and growth-class fits."""

from .domain import DEFAULT_NODES, Box, QuadratureGrid
from .growth import (
    DEFAULT_K_LADDER,
    DEFAULT_SAMPLE_POINTS,
    GevreyFit,
    GrowthReport,
    MembershipReport,
    RoumieuFit,
    derivative_growth,
    derivative_sup_norms,
    fit_beurling,
    fit_roumieu,
    gevrey_order,
    iterate_growth,
    membership_report,
)
from .norms import (
    DEFAULT_DELTA_GRID,
    IterateNormTable,
    RecursionRow,
    empirical_recursion_constant,
    iterate_norms,
    l2_norm,
    nabla_norm,
    npm_profile,
    npm_seminorm,
)

__all__ = [
    "DEFAULT_DELTA_GRID",
    "DEFAULT_K_LADDER",
    "DEFAULT_NODES",
    "DEFAULT_SAMPLE_POINTS",
    "Box",
    "GevreyFit",
    "GrowthReport",
    "IterateNormTable",
    "MembershipReport",
    "QuadratureGrid",
    "RecursionRow",
    "RoumieuFit",
    "derivative_growth",
    "derivative_sup_norms",
    "empirical_recursion_constant",
    "fit_beurling",
    "fit_roumieu",
    "gevrey_order",
    "iterate_growth",
    "iterate_norms",
    "l2_norm",
    "membership_report",
    "nabla_norm",
    "npm_profile",
    "npm_seminorm",
]
