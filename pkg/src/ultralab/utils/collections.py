"""Custom data structures."""

from __future__ import annotations

from collections import OrderedDict
from collections.abc import Callable, Hashable, Iterator, MutableMapping
from contextlib import AbstractContextManager, nullcontext
from typing import Any, Generic, TypeVar, cast

import threading

__all__ = ["MemoTable"]

KT = TypeVar("KT", bound=Hashable)
VT = TypeVar("VT")


class MemoTable(MutableMapping[KT, VT], Generic[KT, VT]):
    """Bounded memo table with least-recently-used eviction.

    Arguments:
        limit (int): The maximum number of entries to keep.
            When a new key is inserted and the limit has been exceeded,
            the *Least Recently Used* key is discarded.
        thread_safety (bool): Enable if multiple OS threads are going
            to read/fill the table.
    """

    limit: int | None
    thread_safety: bool
    hits: int
    misses: int
    _mutex: AbstractContextManager
    data: OrderedDict

    def __init__(self, limit: int | None = None, *, thread_safety: bool = False) -> None:
        self.limit = limit
        self.thread_safety = thread_safety
        self.hits = 0
        self.misses = 0
        self._mutex = self._new_lock()
        self.data = OrderedDict()

    def __getitem__(self, key: KT) -> VT:
        with self._mutex:
            self.data.move_to_end(key)
            return cast(VT, self.data[key])

    def __setitem__(self, key: KT, value: VT) -> None:
        with self._mutex:
            if key in self.data:
                self.data.move_to_end(key)
            elif self.limit and len(self.data) >= self.limit:
                # remove least recently used key.
                self.data.popitem(last=False)
            self.data[key] = value

    def __delitem__(self, key: KT) -> None:
        with self._mutex:
            del self.data[key]

    def __iter__(self) -> Iterator[KT]:
        with self._mutex:
            return iter(list(self.data))

    def __len__(self) -> int:
        return len(self.data)

    def __contains__(self, key: object) -> bool:
        return key in self.data

    def get_or_compute(self, key: KT, compute: Callable[[], VT]) -> VT:
        """Return cached value for ``key``, computing and storing it on a miss.

        ``compute`` runs while holding the lock, so concurrent callers
        observe one computation per key.
        """
        with self._mutex:
            try:
                value = self.data[key]
            except KeyError:
                self.misses += 1
                value = compute()
                if self.limit and len(self.data) >= self.limit:
                    self.data.popitem(last=False)
                self.data[key] = value
            else:
                self.hits += 1
                self.data.move_to_end(key)
            return cast(VT, value)

    def clear(self) -> None:
        with self._mutex:
            self.data.clear()
            self.hits = self.misses = 0

    def _new_lock(self) -> AbstractContextManager:
        if self.thread_safety:
            return cast(AbstractContextManager, threading.RLock())
        return nullcontext()

    def __getstate__(self) -> dict[str, Any]:
        d = dict(vars(self))
        d.pop("_mutex")
        return d

    def __setstate__(self, state: dict[str, Any]) -> None:
        self.__dict__ = state
        self._mutex = self._new_lock()
