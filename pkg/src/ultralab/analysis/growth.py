"""Roumieu/Beurling growth fits and membership reports.

Norm tables are compared with ``c e^{(1/k)φ*(jmk)}`` (Roumieu) and
``c_k e^{kφ*(jm/k)}`` (Beurling).  Everything runs in the log domain;
zero rows become ``-inf`` and never constrain a fit.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from ultralab.exceptions import ParameterError, PreconditionError
from ultralab.pdo import LinearPDO
from ultralab.symbolic import DerivativeTable, Expr, evaluate
from ultralab.utils.futures import map_rows
from ultralab.utils.logging import get_logger
from ultralab.weights import Weight, YoungConjugate

from .domain import Box, QuadratureGrid
from .norms import IterateNormTable, iterate_norms

__all__ = [
    "DEFAULT_K_LADDER",
    "STABILITY_TOLERANCE",
    "DEFAULT_SAMPLE_POINTS",
    "RoumieuFit",
    "GrowthReport",
    "MembershipReport",
    "GevreyFit",
    "fit_roumieu",
    "fit_beurling",
    "derivative_growth",
    "derivative_sup_norms",
    "iterate_growth",
    "membership_report",
    "gevrey_order",
]

logger = get_logger(__name__)

DEFAULT_K_LADDER: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)

#: relative change of ``log c_k`` allowed between half and full window.
STABILITY_TOLERANCE = 0.1

#: sup-norm sample points per axis for the derivative side.
DEFAULT_SAMPLE_POINTS = 33


def _conj(weight: Weight | YoungConjugate) -> YoungConjugate:
    return weight if isinstance(weight, YoungConjugate) else YoungConjugate(weight)


def _log_norms(norms: Sequence[float]) -> np.ndarray:
    values = np.asarray(norms, dtype=float)
    if values.ndim != 1 or not len(values):
        raise ParameterError("norm table must be a nonempty sequence")
    if np.any(values < 0) or np.any(np.isnan(values)):
        raise ParameterError("norm table entries must be nonnegative numbers")
    with np.errstate(divide="ignore"):
        return np.log(values)


def _finite_or_none(v: float) -> float | None:
    return float(v) if math.isfinite(v) else None


@dataclass(frozen=True)
class RoumieuFit:
    """Fitted ``(k*, c*)`` with the per-ladder table behind it."""

    k: float
    log_c: float
    stable: bool
    ladder: tuple[float, ...]
    log_c_table: dict[float, float]
    stable_table: dict[float, bool]
    residuals: tuple[float, ...]

    @property
    def c(self) -> float:
        return math.exp(self.log_c) if self.log_c > -math.inf else 0.0

    def as_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "c": self.c,
            "log_c": _finite_or_none(self.log_c),
            "stable": self.stable,
            "ladder": list(self.ladder),
            "log_c_table": {str(k): _finite_or_none(v) for k, v in self.log_c_table.items()},
            "stable_table": {str(k): v for k, v in self.stable_table.items()},
            "residuals": [_finite_or_none(r) for r in self.residuals],
        }


def _window_max(values: np.ndarray) -> tuple[float, float]:
    half = (len(values) - 1) // 2
    return float(np.max(values)), float(np.max(values[: half + 1]))


def _is_stable(full: float, half: float) -> bool:
    if full == -math.inf:
        return True
    if half == -math.inf:
        return False
    return abs(full - half) <= STABILITY_TOLERANCE * abs(full) + 1e-12


def fit_roumieu(
    norms: Sequence[float],
    weight: Weight | YoungConjugate,
    m: int,
    ladder: Sequence[float] = DEFAULT_K_LADDER,
) -> RoumieuFit:
    """Smallest ladder ``k`` with a window-stable ``c_k``.

    ``log c_k = max_j (log norm_j - (1/k)φ*(jmk))``, so the returned pair
    bounds every row by construction.  Stability compares ``c_k`` on the
    first half of the rows with the full table.  When no ``k`` is stable
    the largest one is returned with ``stable=False``.
    """
    if m < 0:
        raise ParameterError(f"order m must be nonnegative, got {m}")
    ladder = tuple(sorted(float(k) for k in ladder))
    if not ladder or ladder[0] <= 0:
        raise ParameterError("k ladder must be a nonempty list of positive reals")
    logs = _log_norms(norms)
    conj = _conj(weight)
    j = np.arange(len(logs))

    log_c_table: dict[float, float] = {}
    stable_table: dict[float, bool] = {}
    bounds: dict[float, np.ndarray] = {}
    for k in ladder:
        bounds[k] = np.array([conj(jj * m * k) / k for jj in j])
        full, half = _window_max(logs - bounds[k])
        log_c_table[k] = full
        stable_table[k] = _is_stable(full, half)

    chosen = next((k for k in ladder if stable_table[k]), ladder[-1])
    log_c = log_c_table[chosen]
    with np.errstate(invalid="ignore"):
        residuals = logs - log_c - bounds[chosen] if log_c > -math.inf else logs
    return RoumieuFit(
        chosen,
        log_c,
        stable_table[chosen],
        ladder,
        log_c_table,
        stable_table,
        tuple(float(r) for r in residuals),
    )


def fit_beurling(
    norms: Sequence[float],
    weight: Weight | YoungConjugate,
    m: int,
    ladder: Sequence[float] = DEFAULT_K_LADDER,
) -> dict[float, float]:
    """``k ↦ log c_k`` with ``log c_k = max_j (log norm_j - kφ*(jm/k))``."""
    logs = _log_norms(norms)
    conj = _conj(weight)
    table = {}
    for k in sorted(float(k) for k in ladder):
        bound = np.array([k * conj(jj * m / k) for jj in range(len(logs))])
        table[k] = float(np.max(logs - bound))
    return table


@dataclass
class GrowthReport:
    """Norm table of one side together with its fits."""

    side: str
    norms: list[float]
    weight: str
    m: int
    fit: RoumieuFit
    beurling: dict[float, float]
    truncated: bool = False
    #: labels always describe a finite window of rows
    finite_window: bool = True

    @property
    def verdict(self) -> str:
        return "bounded" if self.fit.stable else "diverging"

    @property
    def caveat(self) -> bool:
        return not self.fit.stable or self.truncated or len(self.norms) < 4

    def as_dict(self) -> dict[str, Any]:
        return {
            "side": self.side,
            "norms": self.norms,
            "weight": self.weight,
            "m": self.m,
            "fit": self.fit.as_dict(),
            "beurling": {str(k): _finite_or_none(v) for k, v in self.beurling.items()},
            "verdict": self.verdict,
            "caveat": self.caveat,
            "finite_window": self.finite_window,
            "truncated": self.truncated,
        }


def _report(
    side: str,
    norms: Sequence[float],
    weight: Weight | YoungConjugate,
    m: int,
    ladder: Sequence[float],
    truncated: bool = False,
) -> GrowthReport:
    conj = _conj(weight)
    return GrowthReport(
        side,
        [float(v) for v in norms],
        conj.weight.spec,
        m,
        fit_roumieu(norms, conj, m, ladder),
        fit_beurling(norms, conj, m, ladder),
        truncated,
    )


def derivative_sup_norms(
    u: Expr, K: Box, N: int, *, points: int = DEFAULT_SAMPLE_POINTS, workers: int = 1
) -> list[float]:
    """``q ↦ max_{|α|=q} sup_K |D^α u|`` on a sample grid."""
    if N < 0:
        raise ParameterError(f"N must be nonnegative, got {N}")
    axes = [np.linspace(a, b, points) for a, b in K.intervals]
    env = {f"x{k + 1}": g for k, g in enumerate(np.meshgrid(*axes, indexing="ij"))}
    table = DerivativeTable(u)
    rows_by_q = [list(table.of_order(K.dim, q)) for q in range(N + 1)]

    def sup(row: list) -> float:
        return max((float(np.max(np.abs(evaluate(d, env)))) for _, d in row), default=0.0)

    return map_rows(sup, rows_by_q, workers=workers)


def derivative_growth(
    u: Expr,
    K: Box,
    N: int,
    w: Weight | YoungConjugate,
    *,
    ladder: Sequence[float] = DEFAULT_K_LADDER,
    points: int = DEFAULT_SAMPLE_POINTS,
    workers: int = 1,
) -> GrowthReport:
    """Derivative side: sup-norm table fitted with ``m = 1``."""
    norms = derivative_sup_norms(u, K, N, points=points, workers=workers)
    return _report("derivative", norms, w, 1, ladder)


def iterate_growth(
    P: LinearPDO,
    u: Expr,
    K: Box,
    J: int,
    w: Weight | YoungConjugate,
    *,
    grid: QuadratureGrid | None = None,
    ladder: Sequence[float] = DEFAULT_K_LADDER,
) -> GrowthReport:
    """Iterate side: ``‖P^j u‖_{L²(K)}`` fitted with ``m = order(P)``."""
    table: IterateNormTable = iterate_norms(P, u, K, J, grid)
    return _report("iterate", table.rows, w, P.order, ladder, table.truncated)


def _tail_slope(report: GrowthReport, conj: YoungConjugate) -> float | None:
    logs = _log_norms(report.norms)
    start = len(logs) // 2
    j = np.arange(start, len(logs))
    x = np.array([conj(jj * report.m) for jj in j])
    y = logs[start:]
    keep = np.isfinite(y)
    if np.count_nonzero(keep) < 2 or np.ptp(x[keep]) == 0:
        return None
    return float(np.polyfit(x[keep], y[keep], 1)[0])


@dataclass
class MembershipReport:
    iterate: GrowthReport
    derivative: GrowthReport
    slopes: dict[str, float | None] = field(default_factory=dict)

    @property
    def flags(self) -> dict[str, bool]:
        return {
            "iterate_bounded": self.iterate.fit.stable,
            "derivative_bounded": self.derivative.fit.stable,
            "consistent": self.iterate.fit.stable == self.derivative.fit.stable,
            "caveat": self.iterate.caveat or self.derivative.caveat,
        }

    def as_dict(self) -> dict[str, Any]:
        return {
            "iterate": self.iterate.as_dict(),
            "derivative": self.derivative.as_dict(),
            "slopes": self.slopes,
            "flags": self.flags,
        }


def membership_report(
    u: Expr,
    P: LinearPDO,
    K: Box,
    w: Weight | YoungConjugate,
    J: int,
    N: int,
    *,
    grid: QuadratureGrid | None = None,
    ladder: Sequence[float] = DEFAULT_K_LADDER,
    points: int = DEFAULT_SAMPLE_POINTS,
    workers: int = 1,
) -> MembershipReport:
    """Both sides of the iterate/derivative comparison.

    The comparison statistic is the least-squares slope of ``log norm_j``
    against ``φ*(jm)`` on the last half of each table.
    """
    if P.order < 1:
        raise PreconditionError("membership reports need an operator of order m >= 1")
    conj = _conj(w)
    iterate = iterate_growth(P, u, K, J, conj, grid=grid, ladder=ladder)
    derivative = derivative_growth(u, K, N, conj, ladder=ladder, points=points, workers=workers)
    report = MembershipReport(
        iterate,
        derivative,
        {"iterate": _tail_slope(iterate, conj), "derivative": _tail_slope(derivative, conj)},
    )
    logger.info("membership report", extra=report.flags)
    return report


@dataclass(frozen=True)
class GevreyFit:
    """``log y_d ≈ log Γ(e(d+1)) + a d + b``."""

    order: float
    slope: float
    intercept: float
    residual: float

    def as_dict(self) -> dict[str, Any]:
        return {
            "order": self.order,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
        }


def gevrey_order(
    orders: Sequence[float],
    logs: Sequence[float],
    bounds: tuple[float, float] = (0.05, 20.0),
) -> GevreyFit:
    """Fit the Gevrey order ``e`` of a sequence given by its logarithms.

    For each candidate ``e`` the remainder ``logs - log Γ(e(d+1))`` is
    regressed on ``(d, 1)``; ``e`` minimizes the squared residual.
    """
    d = np.asarray(orders, dtype=float)
    y = np.asarray(logs, dtype=float)
    keep = np.isfinite(y)
    d, y = d[keep], y[keep]
    if len(d) < 3:
        raise ParameterError("need at least three finite points to fit a Gevrey order")
    design = np.column_stack((d, np.ones_like(d)))

    def residual(e: float) -> tuple[float, np.ndarray]:
        target = y - gammaln(e * (d + 1.0))
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        return float(np.sum((design @ coef - target) ** 2)), coef

    found = minimize_scalar(
        lambda e: residual(e)[0], bounds=bounds, method="bounded", options={"xatol": 1e-10}
    )
    e = float(found.x)
    value, coef = residual(e)
    return GevreyFit(e, float(coef[0]), float(coef[1]), value)
