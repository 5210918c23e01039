"""Concurrency utilities for gamelab.

Provides a shared thread pool for independent experiment cells (path
blocks, one-gamma solves, mollification trebles). Results always come
back in submission order so aggregation does not depend on scheduling.
"""

import logging
import os
import threading
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import Any, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")

THREADS_ENV = "GAMELAB_THREADS"

_executor: ThreadPoolExecutor | None = None
_executor_workers = 0
_lock = threading.Lock()


def resolve_threads(requested: int | None = None) -> int:
    """Worker count: explicit request, then GAMELAB_THREADS, then 1."""
    if requested is not None and requested > 0:
        return requested
    raw = os.environ.get(THREADS_ENV, "")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


def _get_executor(workers: int) -> ThreadPoolExecutor:
    global _executor, _executor_workers
    with _lock:
        if _executor is None or _executor_workers != workers:
            if _executor is not None:
                _executor.shutdown(wait=True)
            _executor = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="gamelab-cell")
            _executor_workers = workers
        return _executor


def run_cells(
    fn: Callable[[Any], T],
    cells: Iterable[Any],
    threads: int | None = None,
    on_done: Callable[[T], None] | None = None,
) -> list[T]:
    """Run fn over cells, returning results in submission order.

    With a single worker the cells run inline on the calling thread.
    on_done is invoked once per finished cell (used for progress bars).
    """
    cells = list(cells)
    workers = resolve_threads(threads)
    if workers == 1 or len(cells) <= 1:
        results = []
        for cell in cells:
            result = fn(cell)
            if on_done is not None:
                on_done(result)
            results.append(result)
        return results

    logger.debug("Dispatching %d cells to %d workers", len(cells), workers)
    executor = _get_executor(workers)
    futures = [executor.submit(fn, cell) for cell in cells]
    results = []
    for future in futures:
        result = future.result()
        if on_done is not None:
            on_done(result)
        results.append(result)
    return results
