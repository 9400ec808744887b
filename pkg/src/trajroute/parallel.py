# -*- coding: utf-8 -*-
"""
Parallel work orchestration for the routing pipeline.

Per-T-edge learning, per-column solves, per-region searches, per-B-edge
population and per-query evaluation are independent units of work over
read-only inputs. ParallelRunner fans them out over a thread pool and hands
results back in input order so downstream merging stays deterministic.
"""

import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Any, Optional

from .thread_utils import enable_thread_safe_print
from .utils import is_debug_enabled


@dataclass
class TaskOutcome:
    """Result of one unit of work: either a value or the exception it raised."""
    item: Any
    result: Any = None
    error: Optional[BaseException] = None

    @property
    def ok(self):
        return self.error is None


class ParallelRunner:
    """
    Parallel task orchestrator.

    Runs a function over many items concurrently while:
    - Naming worker threads for debug output ([Learn-1], [Solve-2], ...)
    - Enabling thread-safe print in every worker
    - Collecting per-item errors instead of aborting the batch
    - Returning outcomes in input order
    """

    def __init__(self, max_workers=4, label="Worker"):
        """
        Initialize parallel runner.

        Args:
            max_workers (int): Maximum concurrent worker threads (1 = run inline)
            label (str): Default worker name prefix
        """
        if max_workers < 1:
            raise ValueError("max_workers must be at least 1")
        self.max_workers = max_workers
        self.label = label

    def run(self, fn, items, label=None):
        """
        Apply fn to every item.

        Args:
            fn (callable): Function taking one item
            items (iterable): Work items
            label (str): Worker name prefix for this batch (default: runner label)

        Returns:
            list[TaskOutcome]: One outcome per item, in input order
        """
        items = list(items)
        label = label or self.label
        outcomes = [TaskOutcome(item=item) for item in items]

        if self.max_workers == 1 or len(items) <= 1:
            for outcome in outcomes:
                try:
                    outcome.result = fn(outcome.item)
                except Exception as e:
                    outcome.error = e
            return outcomes

        def worker(worker_id, index):
            """Worker function for one item"""
            threading.current_thread().name = f"{label}-{worker_id}"
            enable_thread_safe_print()
            return fn(items[index])

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_index = {
                executor.submit(worker, idx % self.max_workers + 1, idx): idx
                for idx in range(len(items))
            }

            for future in as_completed(future_to_index):
                index = future_to_index[future]
                try:
                    outcomes[index].result = future.result()
                except Exception as e:
                    if is_debug_enabled():
                        print(f"[!] {label} task {index} failed: {str(e)[:200]}")
                    outcomes[index].error = e

        return outcomes

    def map(self, fn, items, label=None):
        """
        Apply fn to every item and re-raise the first error in input order.

        Returns:
            list: Results in input order
        """
        outcomes = self.run(fn, items, label=label)
        for outcome in outcomes:
            if outcome.error is not None:
                raise outcome.error
        return [outcome.result for outcome in outcomes]


# Sequential runner used when callers pass no runner
SEQUENTIAL = ParallelRunner(max_workers=1, label="Main")
