"""Ordered per-design fan-out."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(func: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> List[R]:
    """Apply ``func`` to every item, returning results in input order.

    ``func`` must be picklable (module-level or a ``functools.partial`` of
    one) when ``jobs > 1``.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items, chunksize=max(1, len(items) // (4 * jobs))))
