"""Memoized mixed partial derivatives."""

from __future__ import annotations

from collections.abc import Iterator, Sequence

from .expr import Const, Expr, differentiate
from .multiindex import MultiIndex

__all__ = ["DerivativeTable", "differentiate_multi"]


class DerivativeTable:
    """``∂^α f`` for any ``α``, each built from a lower one by one derivative."""

    def __init__(self, f: Expr, *, expand: bool = True) -> None:
        self.f = f
        self.expand = expand
        self.table: dict[MultiIndex, Expr] = {}

    def __getitem__(self, alpha: Sequence[int]) -> Expr:
        alpha = MultiIndex(alpha)
        try:
            return self.table[alpha]
        except KeyError:
            pass
        if alpha.order == 0:
            value = self.f
        else:
            axis = next(i for i, a in enumerate(alpha) if a)
            lower = alpha - MultiIndex.unit(len(alpha), axis)
            value = differentiate(self[lower], f"x{axis + 1}", expand=self.expand)
        self.table[alpha] = value
        return value

    def __len__(self) -> int:
        return len(self.table)

    def of_order(self, dim: int, order: int) -> Iterator[tuple[MultiIndex, Expr]]:
        """Nonzero derivatives with ``|α| = order``."""
        for alpha in MultiIndex.all_of_order(dim, order):
            d = self[alpha]
            if not (isinstance(d, Const) and d.is_zero):
                yield alpha, d


def differentiate_multi(e: Expr, alpha: Sequence[int], *, expand: bool = False) -> Expr:
    """``∂^α e`` over ``x1..xn``."""
    return DerivativeTable(e, expand=expand)[alpha]
