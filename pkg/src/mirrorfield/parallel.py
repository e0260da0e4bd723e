"""Thread fan-out with a fixed reduction order.

Work is split into chunks whose boundaries never depend on the thread count,
and partial results are combined in chunk order, so sums are bit-identical
for any ``MIRRORFIELD_THREADS``.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_VAR = "MIRRORFIELD_THREADS"


def thread_count() -> int:
    raw = os.environ.get(ENV_VAR, "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError:
            n = 1
        return max(1, n)
    return max(1, min(8, os.cpu_count() or 1))


def ordered_map(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """``[fn(x) for x in items]``, possibly concurrently; result order follows ``items``."""
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))


def ordered_sum(parts):
    """Left-to-right sum (numpy arrays or scalars)."""
    total = None
    for p in parts:
        total = p if total is None else total + p
    return total
