"""
This module defines the `Worker` class used to fan independent jobs (Monte Carlo
trial blocks, optimizer grid points) out over a process pool.

Results are always returned in item order, so any reduction done by the caller is
independent of how many processes were used.
"""
from __future__ import annotations

import logging
import multiprocessing
from typing import Any, Callable, Iterable, Optional

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int, Any], None]


class Worker:
    """
    A generic worker for processing a sequence of items, serially or in a process pool.

    Attributes:
        processes (int): Number of worker processes. 1 runs everything in-process.
    """

    def __init__(
        self,
        func: Callable[[Any], Any],
        items: Iterable[Any],
        processes: int = 1,
        progress: Optional[ProgressCallback] = None,
    ):
        """
        Initializes the Worker.

        Args:
            func (Callable[[Any], Any]): The function to apply to each item. With more than
                                         one process it must be picklable (a module-level
                                         function or a `functools.partial` of one).
            items (Iterable[Any]): The items to be processed by `func`.
            processes (int): Number of processes to use. Defaults to 1.
            progress (Optional[ProgressCallback]): Called as (current_index, total_items, item)
                                                   after each item completes.
        """
        self._func = func
        self._items = list(items)
        self.processes = max(1, int(processes))
        self._progress = progress
        self._results: list[Any] = []
        logger.debug(f"Worker initialized with {len(self._items)} items and {self.processes} process(es).")

    def run(self) -> list[Any]:
        """
        Executes the worker's task, applying `func` to every item.

        Errors raised by `func` are logged and re-raised; a partial result list is never
        returned silently.

        Returns:
            list[Any]: The results in the same order as the input items.
        """
        total = len(self._items)
        self._results = []
        logger.debug(f"Worker started processing {total} items.")
        if self.processes == 1 or total <= 1:
            for idx, item in enumerate(self._items, 1):
                try:
                    self._results.append(self._func(item))
                except Exception as e:
                    logger.error(f"Error processing item {item}: {e}")
                    raise
                self._report(idx, total, item)
        else:
            with multiprocessing.Pool(processes=min(self.processes, total)) as pool:
                try:
                    for idx, result in enumerate(pool.imap(self._func, self._items), 1):
                        self._results.append(result)
                        self._report(idx, total, self._items[idx - 1])
                except Exception as e:
                    logger.error(f"Error in worker pool after {len(self._results)}/{total} items: {e}")
                    raise
        logger.debug(f"Worker finished. Processed {len(self._results)} items.")
        return self._results

    def _report(self, idx: int, total: int, item: Any) -> None:
        if self._progress is not None:
            self._progress(idx, total, item)
