"""Boxes and tensor Simpson grids."""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.integrate import simpson

from ultralab.exceptions import DimensionError, ParameterError
from ultralab.symbolic import Expr, evaluate
from ultralab.utils.text import parse_floats

__all__ = ["Box", "QuadratureGrid", "DEFAULT_NODES"]

#: Simpson nodes per axis unless a grid is given.
DEFAULT_NODES = 129


@dataclass(frozen=True)
class Box:
    """Product of closed intervals; ``empty`` once shrunk past its center."""

    intervals: tuple[tuple[float, float], ...]
    empty: bool = False

    def __post_init__(self) -> None:
        intervals = tuple((float(a), float(b)) for a, b in self.intervals)
        if not intervals:
            raise DimensionError("box needs at least one axis")
        if not self.empty and any(not a < b for a, b in intervals):
            raise ParameterError(f"box intervals must satisfy a < b: {intervals}")
        object.__setattr__(self, "intervals", intervals)

    @classmethod
    def parse(cls, text: str) -> Box:
        """``"a1,b1,a2,b2"`` → ``[a1,b1] × [a2,b2]``."""
        try:
            values = parse_floats(text)
        except ValueError as exc:
            raise ParameterError(f"invalid box {text!r}: {exc}") from None
        if not values or len(values) % 2:
            raise ParameterError(f"box needs an even number of bounds, got {text!r}")
        return cls(tuple(zip(values[::2], values[1::2])))

    @classmethod
    def cube(cls, dim: int, a: float, b: float) -> Box:
        return cls(((a, b),) * dim)

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def sides(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in self.intervals)

    @property
    def volume(self) -> float:
        return 0.0 if self.empty else math.prod(self.sides)

    @property
    def center(self) -> tuple[float, ...]:
        return tuple((a + b) / 2.0 for a, b in self.intervals)

    def shrink(self, delta: float) -> Box:
        """``{x : dist(x, ∂G) > δ}``, empty when ``2δ`` reaches the smallest side."""
        if delta < 0:
            raise ParameterError(f"shrink distance must be nonnegative, got {delta}")
        if self.empty or 2.0 * delta >= min(self.sides):
            return Box(self.intervals, empty=True)
        return Box(tuple((a + delta, b - delta) for a, b in self.intervals))

    def contains(self, point: Iterable[float]) -> bool:
        return not self.empty and all(a <= x <= b for x, (a, b) in zip(point, self.intervals))

    def to_text(self) -> str:
        return ",".join(f"{v:g}" for pair in self.intervals for v in pair)

    def as_dict(self) -> dict[str, Any]:
        return {"intervals": [list(pair) for pair in self.intervals], "empty": self.empty}


@dataclass(frozen=True)
class QuadratureGrid:
    """Composite Simpson rule, the same odd node count on every axis."""

    nodes: int = DEFAULT_NODES
    level: int = 0

    def __post_init__(self) -> None:
        if self.nodes < 3 or self.nodes % 2 == 0:
            raise ParameterError(f"Simpson grids need an odd node count >= 3, got {self.nodes}")

    def refine(self) -> QuadratureGrid:
        """Halve the spacing: ``n → 2(n-1)+1``."""
        return QuadratureGrid(2 * (self.nodes - 1) + 1, self.level + 1)

    def axes(self, box: Box) -> list[np.ndarray]:
        return [np.linspace(a, b, self.nodes) for a, b in box.intervals]

    def points(self, box: Box) -> dict[str, np.ndarray]:
        """Variable bindings ``x1..xn`` on the tensor grid."""
        grids = np.meshgrid(*self.axes(box), indexing="ij")
        return {f"x{k + 1}": g for k, g in enumerate(grids)}

    def integrate(self, box: Box, values: np.ndarray) -> float | complex:
        """Integrate sampled values (shape ``(nodes,) * dim``) over ``box``."""
        if box.empty:
            return 0.0
        result: Any = values
        for axis in reversed(self.axes(box)):
            result = simpson(result, x=axis, axis=-1)
        return result.item() if isinstance(result, np.ndarray) else result

    def integrate_expr(
        self, box: Box, f: Expr, extra: Mapping[str, Any] | None = None
    ) -> float | complex:
        if box.empty:
            return 0.0
        env: dict[str, Any] = dict(self.points(box))
        if extra:
            env.update(extra)
        return self.integrate(box, evaluate(f, env))
