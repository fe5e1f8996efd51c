"""Ordered parallel map over Monte Carlo paths."""

from __future__ import annotations

import logging
from typing import Any, Callable, Iterable, List, TypeVar

import joblib
import tqdm

logger = logging.getLogger(__name__)

_T = TypeVar("_T")


def parallel_map(
    func: Callable[..., _T],
    items: Iterable[Any],
    workers: int = 1,
    desc: str | None = None,
    progress: bool = True,
) -> List[_T]:
    """Apply func to every item; results keep the order of items.

    Args:
        func: Picklable callable of one argument.
        items: Work items, e.g., path indices.
        workers: Number of joblib processes; 1 runs in this process.
        desc: Progress bar label.
        progress: Show a tqdm bar.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, but it is {workers}!")
    items = list(items)
    if workers == 1:
        iterator = tqdm.tqdm(items, desc=desc, disable=not progress)
        return [func(item) for item in iterator]
    logger.debug("Running %d items on %d workers.", len(items), workers)
    runner = joblib.Parallel(
        n_jobs=workers, prefer="processes", return_as="generator"
    )
    results = runner(joblib.delayed(func)(item) for item in items)
    # one tick per finished item
    return list(
        tqdm.tqdm(results, total=len(items), desc=desc, disable=not progress)
    )
