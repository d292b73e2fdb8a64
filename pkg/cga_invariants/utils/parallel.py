"""Fan a picklable function out over a process pool."""

import logging
import os
from collections.abc import Callable, Iterable
from concurrent.futures import ProcessPoolExecutor
from typing import TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: int) -> int:
    """0 means one worker per CPU."""
    if workers < 0:
        raise ValueError("workers must be >= 0")
    if workers == 0:
        return os.cpu_count() or 1
    return workers


def fan_out(func: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """
    Apply ``func`` to every item; results come back in input order.

    With one worker everything runs in-process.

    Args:
        func: Module-level function, so it can be sent to worker processes
        items: Inputs
        workers: Worker processes, 0 for one per CPU

    Returns:
        func(item) for every item, in input order

    Raises:
        ValueError: If workers is negative
    """
    batch = list(items)
    count = min(resolve_workers(workers), max(len(batch), 1))
    if count == 1:
        return [func(item) for item in batch]
    logger.info(f"Running {len(batch)} tasks on {count} worker processes")
    with ProcessPoolExecutor(max_workers=count) as pool:
        return list(pool.map(func, batch))
