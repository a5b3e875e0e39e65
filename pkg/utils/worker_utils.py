"""
worker_utils.py - Ordered parallel map over a QThreadPool

Provides:
- WorkerState / WorkerStats bookkeeping
- SolveTask runnables processing contiguous chunks of items
- ordered_map: results in input order, first error in input order re-raised
"""

import logging
import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, List, Optional, Sequence, TypeVar

from PyQt6.QtCore import QRunnable, QThread, QThreadPool

logger = logging.getLogger("bregman_tda.workers")

T = TypeVar("T")
R = TypeVar("R")


class WorkerState(Enum):
    """Worker state"""
    IDLE = "idle"
    RUNNING = "running"
    FINISHED = "finished"
    ERROR = "error"


@dataclass
class WorkerStats:
    """Worker statistics"""
    created_at: float
    started_at: Optional[float] = None
    finished_at: Optional[float] = None
    state: WorkerState = WorkerState.IDLE
    errors: int = 0
    tasks_completed: int = 0

    def elapsed(self) -> float:
        if self.started_at is None:
            return 0.0
        return (self.finished_at or time.time()) - self.started_at


def default_thread_count() -> int:
    return max(1, QThread.idealThreadCount())


class SolveTask(QRunnable):
    """Runs fn over items[start:stop], storing results or the exception per slot"""

    def __init__(self, fn: Callable[[Any], Any], items: Sequence[Any], start: int,
                 stop: int, results: List[Any], errors: List[Optional[BaseException]]):
        super().__init__()
        self.fn = fn
        self.items = items
        self.start_index = start
        self.stop_index = stop
        self.results = results
        self.errors = errors
        self.setAutoDelete(False)

    def run(self):
        for i in range(self.start_index, self.stop_index):
            try:
                self.results[i] = self.fn(self.items[i])
            except BaseException as exc:  # re-raised by ordered_map
                self.errors[i] = exc
                return


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1,
                stats: Optional[WorkerStats] = None) -> List[R]:
    """
    Apply fn to every item, possibly in parallel.

    The returned list is in input order. If any call raises, the exception of
    the lowest failing index is re-raised after all tasks finish, so the
    outcome does not depend on the thread count.
    """
    stats = stats or WorkerStats(created_at=time.time())
    stats.started_at = time.time()
    stats.state = WorkerState.RUNNING
    count = len(items)

    if threads <= 1 or count <= 1:
        results: List[Any] = []
        try:
            for item in items:
                results.append(fn(item))
                stats.tasks_completed += 1
        except BaseException:
            stats.errors += 1
            stats.state = WorkerState.ERROR
            stats.finished_at = time.time()
            raise
        stats.state = WorkerState.FINISHED
        stats.finished_at = time.time()
        return results

    results = [None] * count
    errors: List[Optional[BaseException]] = [None] * count
    pool = QThreadPool()
    pool.setMaxThreadCount(threads)
    chunk = max(1, math.ceil(count / (threads * 4)))
    tasks = [SolveTask(fn, items, start, min(start + chunk, count), results, errors)
             for start in range(0, count, chunk)]
    for task in tasks:
        pool.start(task)
    pool.waitForDone()

    stats.finished_at = time.time()
    failed = [i for i, err in enumerate(errors) if err is not None]
    if failed:
        stats.errors += len(failed)
        stats.state = WorkerState.ERROR
        logger.debug("%d of %d tasks failed, first at index %d", len(failed), count, failed[0])
        raise errors[failed[0]]
    stats.tasks_completed += count
    stats.state = WorkerState.FINISHED
    return results
