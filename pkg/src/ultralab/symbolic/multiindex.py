"""Multi-indices ``α ∈ ℕ₀ⁿ``."""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator

from ultralab.exceptions import DimensionError, ParameterError

__all__ = ["MultiIndex"]


class MultiIndex(tuple[int, ...]):
    """Tuple of nonnegative integers ordered componentwise."""

    def __new__(cls, components: Iterable[int]) -> MultiIndex:
        values = tuple(int(c) for c in components)
        if any(c < 0 for c in values):
            raise ParameterError(f"multi-index components must be nonnegative: {values}")
        return super().__new__(cls, values)

    @classmethod
    def zero(cls, n: int) -> MultiIndex:
        return cls((0,) * n)

    @classmethod
    def unit(cls, n: int, i: int) -> MultiIndex:
        return cls(1 if j == i else 0 for j in range(n))

    @classmethod
    def all_of_order(cls, n: int, order: int) -> Iterator[MultiIndex]:
        """All ``α`` with ``|α| = order``, lexicographically descending."""
        if n == 0:
            if order == 0:
                yield cls(())
            return
        for first in range(order, -1, -1):
            for rest in cls.all_of_order(n - 1, order - first):
                yield cls((first,) + rest)

    @property
    def dim(self) -> int:
        return len(self)

    @property
    def order(self) -> int:
        return sum(self)

    @property
    def factorial(self) -> int:
        return math.prod(math.factorial(c) for c in self)

    def _check(self, other: MultiIndex) -> None:
        if len(other) != len(self):
            raise DimensionError(f"multi-indices {self} and {other} differ in length")

    def leq(self, other: MultiIndex) -> bool:
        self._check(other)
        return all(a <= b for a, b in zip(self, other))

    def __add__(self, other: tuple[int, ...]) -> MultiIndex:  # type: ignore[override]
        other = MultiIndex(other)
        self._check(other)
        return MultiIndex(a + b for a, b in zip(self, other))

    def __sub__(self, other: tuple[int, ...]) -> MultiIndex:
        other = MultiIndex(other)
        self._check(other)
        return MultiIndex(a - b for a, b in zip(self, other))

    def binom(self, other: MultiIndex) -> int:
        """``α choose β = Π C(αᵢ, βᵢ)`` (zero unless ``β ≤ α``)."""
        self._check(other)
        return math.prod(math.comb(a, b) for a, b in zip(self, other))

    def below(self) -> Iterator[MultiIndex]:
        """All ``β ≤ α``."""
        for combo in itertools.product(*(range(c + 1) for c in self)):
            yield MultiIndex(combo)

    def __repr__(self) -> str:
        return f"MultiIndex({tuple(self)!r})"
