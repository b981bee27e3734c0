"""L² norms, shrinking-domain derivative norms and iterate tables."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ultralab.exceptions import ParameterError, PreconditionError, TermBudgetExceeded
from ultralab.pdo import LinearPDO, apply, ellipticity_check
from ultralab.symbolic import DerivativeTable, Expr, evaluate
from ultralab.utils.futures import map_rows
from ultralab.utils.logging import get_logger
from ultralab.weights import Weight, YoungConjugate

from .domain import Box, QuadratureGrid

__all__ = [
    "DEFAULT_DELTA_GRID",
    "IterateNormTable",
    "RecursionRow",
    "l2_norm",
    "nabla_norm",
    "npm_seminorm",
    "npm_profile",
    "iterate_norms",
    "empirical_recursion_constant",
]

logger = get_logger(__name__)

#: 32 geometric points in [1e-3, 1].
DEFAULT_DELTA_GRID: tuple[float, ...] = tuple(np.geomspace(1e-3, 1.0, 32))


def l2_norm(f: Expr, K: Box, grid: QuadratureGrid | None = None) -> float:
    """``(∫_K |f|²)^{1/2}`` by composite Simpson; zero on an empty box."""
    if K.empty:
        return 0.0
    grid = grid or QuadratureGrid()
    values = evaluate(f, grid.points(K))
    integral = grid.integrate(K, np.abs(values) ** 2)
    return math.sqrt(max(0.0, float(np.real(integral))))


def nabla_norm(
    f: Expr,
    q: int,
    delta: float,
    G: Box,
    grid: QuadratureGrid | None = None,
    *,
    derivatives: DerivativeTable | None = None,
) -> float:
    """``Σ_{|α|=q} ‖D^α f‖_{L²(G_δ)}``."""
    if q < 0:
        raise ParameterError(f"derivative order must be nonnegative, got {q}")
    shrunk = G.shrink(delta)
    if shrunk.empty:
        return 0.0
    derivatives = derivatives or DerivativeTable(f)
    return sum(l2_norm(d, shrunk, grid) for _, d in derivatives.of_order(G.dim, q))


def npm_profile(
    u: Expr,
    p: int,
    m: int,
    G: Box,
    delta_grid: Sequence[float] | None = None,
    grid: QuadratureGrid | None = None,
    *,
    derivatives: DerivativeTable | None = None,
    workers: int = 1,
) -> tuple[float, float]:
    """``(N^{pm}(u), δ*)`` with ``δ*`` the maximizing grid point."""
    deltas = tuple(DEFAULT_DELTA_GRID if delta_grid is None else delta_grid)
    if not deltas or any(not 0 < d <= 1 for d in deltas):
        raise ParameterError("δ grid must be a nonempty subset of (0, 1]")
    derivatives = derivatives or DerivativeTable(u)
    order = p * m
    # fill the derivative memo before handing rows to threads
    for _ in derivatives.of_order(G.dim, order):
        pass
    values = map_rows(
        lambda d: d**order * nabla_norm(u, order, d, G, grid, derivatives=derivatives),
        deltas,
        workers=workers,
    )
    best = int(np.argmax(values))
    return float(values[best]), float(deltas[best])


def npm_seminorm(
    u: Expr,
    p: int,
    m: int,
    G: Box,
    delta_grid: Sequence[float] | None = None,
    grid: QuadratureGrid | None = None,
    **kwargs: Any,
) -> float:
    """``N^{pm}(u) = sup_δ δ^{pm} ‖∇^{pm} u‖_δ`` over the δ grid."""
    return npm_profile(u, p, m, G, delta_grid, grid, **kwargs)[0]


@dataclass
class IterateNormTable:
    """Rows ``j ↦ ‖P^j u‖_{L²(K)}``; ``truncated`` when the term budget stopped it."""

    rows: list[float] = field(default_factory=list)
    requested: int = 0
    truncated: bool = False
    reason: str = ""

    def __len__(self) -> int:
        return len(self.rows)

    def as_dict(self) -> dict[str, Any]:
        return {
            "rows": self.rows,
            "requested": self.requested,
            "truncated": self.truncated,
            "reason": self.reason,
        }


def iterate_norms(
    P: LinearPDO,
    u: Expr,
    K: Box,
    J: int,
    grid: QuadratureGrid | None = None,
) -> IterateNormTable:
    """Norms of ``u_{j+1} = P u_j`` for ``j = 0..J``."""
    if J < 0:
        raise ParameterError(f"J must be nonnegative, got {J}")
    table = IterateNormTable(requested=J)
    current = u
    for j in range(J + 1):
        if j:
            try:
                current = apply(P, current)
            except TermBudgetExceeded as exc:
                table.truncated = True
                table.reason = str(exc)
                logger.warning("iterate table truncated", extra={"j": j, "budget": exc.budget})
                break
        table.rows.append(l2_norm(current, K, grid))
    return table


@dataclass(frozen=True)
class RecursionRow:
    p: int
    npm: float
    previous: float
    weighted_sum: float
    constant: float | None
    status: str

    def as_dict(self) -> dict[str, Any]:
        return {
            "p": self.p,
            "npm": self.npm,
            "previous": self.previous,
            "weighted_sum": self.weighted_sum,
            "constant": self.constant,
            "status": self.status,
        }


def empirical_recursion_constant(
    u: Expr,
    P: LinearPDO,
    p_max: int,
    k: float,
    G: Box,
    weight: Weight | YoungConjugate,
    delta_grid: Sequence[float] | None = None,
    grid: QuadratureGrid | None = None,
    *,
    workers: int = 1,
) -> list[RecursionRow]:
    """Smallest ``C₀`` per ``p`` making

    ``N^{pm}(u) <= C₀ {N^{(p-1)m}(Pu) + Σ_{q<p} e^{(1/k)φ*(pmk) - (1/k)φ*(qmk)} N^{qm}(u)}``

    true for the computed seminorms.  Rows are ``undefined`` for 0/0,
    ``unbounded`` when only the right-hand bracket vanishes and
    ``degenerate`` when the left-hand side is zero.
    """
    verdict = ellipticity_check(P, G)
    if not verdict.elliptic:
        raise PreconditionError(
            f"operator is not elliptic on the box (c_min={verdict.c_min:.3g})"
        )
    if not k > 0:
        raise ParameterError(f"k must be positive, got {k}")
    conj = weight if isinstance(weight, YoungConjugate) else YoungConjugate(weight)
    m = P.order
    u_table = DerivativeTable(u)
    Pu = apply(P, u)
    Pu_table = DerivativeTable(Pu)

    def npm(f: Expr, table: DerivativeTable, p: int) -> float:
        return npm_seminorm(
            f, p, m, G, delta_grid, grid, derivatives=table, workers=workers
        )

    N_u = [npm(u, u_table, q) for q in range(p_max + 1)]
    rows = []
    for p in range(1, p_max + 1):
        previous = npm(Pu, Pu_table, p - 1)
        top = conj(p * m * k) / k
        weighted = sum(
            math.exp(top - conj(q * m * k) / k) * N_u[q] for q in range(p)
        )
        denominator = previous + weighted
        lhs = N_u[p]
        if denominator == 0:
            constant, status = (None, "undefined") if lhs == 0 else (math.inf, "unbounded")
        else:
            constant = lhs / denominator
            status = "ok" if lhs > 0 else "degenerate"
        rows.append(RecursionRow(p, lhs, previous, weighted, constant, status))
    return rows
