"""Deterministic execution helpers.

Thread count is read from the BLTK_THREADS environment variable (default 1).
Parallelism is only ever applied to pure per-item work, and results are
collected in input order, so the thread count can never change a reported
number, only how long it takes to appear.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def thread_count() -> int:
    raw = os.environ.get("BLTK_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Apply fn to each item, preserving input order in the result list.

    With BLTK_THREADS > 1 the items run on a thread pool; executor.map
    already yields results in submission order, so the output is identical
    to the sequential path.
    """
    seq: Sequence[T] = list(items)
    n = thread_count()
    if n <= 1 or len(seq) <= 1:
        return [fn(x) for x in seq]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, seq))
