"""Young conjugate ``φ*(y) = sup_{t>=0} (yt - φ(t))``."""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from ultralab.exceptions import DivergenceError, ParameterError
from ultralab.utils.collections import MemoTable
from ultralab.utils.logging import get_logger

from .catalog import Weight

__all__ = ["YoungConjugate", "ConjugateRow", "conjugate_table", "young_conjugate"]

logger = get_logger(__name__)

#: bracket expansion gives up beyond this abscissa.
BRACKET_LIMIT = 2.0**60

#: nodes per zoom level of the grid oracle.
ORACLE_NODES = 4097
ORACLE_MIN_LEVELS = 3
ORACLE_MAX_LEVELS = 80
ORACLE_MAX_WINDOW = 2.0**40


class YoungConjugate:
    """Evaluator for the Young conjugate of ``φ = ω∘exp``.

    ``φ`` convex makes ``g(t) = yt - φ(t)`` concave, so the supremum
    is located by bracket doubling followed by a bounded Brent search.
    Values are memoized per ``(y, tol)`` in a thread-safe table.
    """

    weight: Weight
    tol: float

    def __init__(self, weight: Weight, *, tol: float = 1e-12, memo_limit: int = 65536) -> None:
        if not tol > 0:
            raise ParameterError(f"tolerance must be positive, got {tol}")
        self.weight = weight
        self.tol = tol
        self.memo: MemoTable[tuple[float, float], tuple[float, float]] = MemoTable(
            memo_limit, thread_safety=True
        )

    def __call__(self, y: float) -> float:
        return self.evaluate(y)[0]

    def __repr__(self) -> str:
        return f"<{type(self).__name__}: {self.weight.spec} tol={self.tol:g}>"

    def argmax(self, y: float) -> float:
        """Maximizing ``t`` of ``yt - φ(t)``."""
        return self.evaluate(y)[1]

    def evaluate(self, y: float, tol: float | None = None) -> tuple[float, float]:
        """Return ``(φ*(y), t*)``."""
        y = float(y)
        if y < 0 or math.isnan(y):
            raise ParameterError(f"conjugate argument must be nonnegative, got {y}")
        tol = self.tol if tol is None else tol
        if y == 0:
            return 0.0, 0.0
        return self.memo.get_or_compute((y, tol), lambda: self._search(y, tol))

    def values(self, ys: Iterable[float]) -> np.ndarray:
        return np.array([self(y) for y in ys], dtype=float)

    def _gain(self, y: float, t: float) -> float:
        return y * t - self.weight.phi(t)

    def _search(self, y: float, tol: float) -> tuple[float, float]:
        gain = self._gain
        lo, hi = 0.0, 1.0
        g_hi = gain(y, hi)
        while True:
            g_next = gain(y, 2.0 * hi)
            if not g_next > g_hi:
                break
            lo, hi, g_hi = hi / 2.0, 2.0 * hi, g_next
            if hi > BRACKET_LIMIT:
                raise DivergenceError(
                    f"supremum of yt - φ(t) unbounded for {self.weight.spec} at y={y}"
                )
        hi = 2.0 * hi
        res = minimize_scalar(
            lambda t: -gain(y, t),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": tol * (1.0 + lo), "maxiter": 2000},
        )
        t_star = float(res.x)
        value = max(gain(y, t_star), 0.0)
        for edge in (lo, hi):
            if gain(y, edge) > value:
                t_star, value = edge, gain(y, edge)
        if value == 0.0:
            t_star = 0.0
        return value, t_star

    def grid_oracle(self, y: float, rtol: float = 1e-10) -> float:
        """Brute-force ``φ*(y)`` on refined grids.

        The window doubles until the discrete maximizer is interior, then
        each level halves the window around the maximizer (and so the
        grid step) until the value stabilizes.
        """
        y = float(y)
        if y == 0:
            return 0.0
        phi_array = self.weight.phi_array

        width = 4.0
        while True:
            x = np.linspace(0.0, width, ORACLE_NODES)
            vals = y * x - phi_array(x)
            idx = int(np.argmax(vals))
            if idx < ORACLE_NODES - 1:
                break
            width *= 2.0
            if width > ORACLE_MAX_WINDOW:
                raise DivergenceError(
                    f"grid oracle window unbounded for {self.weight.spec} at y={y}"
                )

        best = float(vals[idx])
        center = float(x[idx])
        half = width / 4.0
        for level in range(1, ORACLE_MAX_LEVELS + 1):
            lo = max(0.0, center - half)
            x = np.linspace(lo, center + half, ORACLE_NODES)
            vals = y * x - phi_array(x)
            idx = int(np.argmax(vals))
            value = max(best, float(vals[idx]))
            change = abs(value - best)
            center, best = float(x[idx]), value
            half /= 2.0
            if level >= ORACLE_MIN_LEVELS and change < rtol * (1.0 + abs(best)) / 10.0:
                break
        return max(0.0, best)


def young_conjugate(weight: Weight, y: float, tol: float = 1e-12) -> float:
    """One-shot ``φ*(y)`` for ``weight``."""
    return YoungConjugate(weight, tol=tol)(y)


@dataclass(frozen=True)
class ConjugateRow:
    y: float
    value: float
    argmax: float
    oracle: float

    @property
    def relative_gap(self) -> float:
        return abs(self.value - self.oracle) / max(1.0, abs(self.oracle))


def conjugate_table(conj: YoungConjugate, ys: Iterable[float]) -> list[ConjugateRow]:
    """Tabulate searched values against the grid oracle."""
    rows = []
    for y in ys:
        value, t_star = conj.evaluate(y)
        rows.append(ConjugateRow(float(y), value, t_star, conj.grid_oracle(y)))
    return rows
