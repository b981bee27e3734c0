"""Thread pool helpers for independent table rows."""

from __future__ import annotations

from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

__all__ = ["map_rows"]

T = TypeVar("T")
R = TypeVar("R")


def map_rows(fun: Callable[[T], R], items: Iterable[T], *, workers: int = 1) -> list[R]:
    """Map ``fun`` over ``items``; results keep the input order.

    With ``workers <= 1`` everything runs in the calling thread.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fun(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fun, items))
