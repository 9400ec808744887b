# -*- coding: utf-8 -*-
"""
Thread-safe utilities for parallel processing.

This module provides thread-safe wrappers for console output and statistics
so that learning, solving, population and evaluation workers can share the
pipeline counters and the console.
"""

import threading
import builtins

from .utils import is_debug_enabled

# Global locks for thread-safe operations
_console_lock = threading.Lock()
_original_print = builtins.print

# Worker labels used by ParallelRunner
WORKER_PREFIXES = ("Learn-", "Solve-", "Populate-", "BFS-", "Eval-")


def thread_safe_print(*args, **kwargs):
    """
    Thread-safe replacement for print() that ensures sequential output.
    When DEBUG=true, includes thread identifier to track which thread produced each log line.

    Thread identifiers (DEBUG mode only):
        [Main] - Main thread (orchestration, statistics, summaries)
        [Learn-N] - Preference learning workers
        [Solve-N] - Transfer column solvers
        [Populate-N] - B-edge path population workers
        [BFS-N] - Region connectivity search workers
        [Eval-N] - Evaluation query workers

    Args:
        *args: Same as print()
        **kwargs: Same as print()
    """
    with _console_lock:
        if is_debug_enabled() and args:
            thread_name = threading.current_thread().name

            if thread_name == "MainThread":
                prefix = "[Main]"
            elif thread_name.startswith(WORKER_PREFIXES):
                prefix = f"[{thread_name}]"
            elif "ThreadPoolExecutor" in thread_name:
                # Unnamed worker thread - extract number
                parts = thread_name.split('_')
                prefix = f"[Worker-{parts[-1]}]" if len(parts) > 1 else "[Worker]"
            else:
                prefix = f"[{thread_name[:10]}]"

            _original_print(prefix, *args, **kwargs)
        else:
            _original_print(*args, **kwargs)


def enable_thread_safe_print():
    """
    Replace built-in print() with thread-safe version.
    Call this at the start of each worker thread.
    """
    builtins.print = thread_safe_print


def restore_original_print():
    """Restore original print() function"""
    builtins.print = _original_print


class ThreadSafeStatsWrapper:
    """
    Locked counter updates on a shared statistics dictionary.

    Workers of a ParallelRunner bump pipeline_stats.stats through this
    wrapper; plain reads of the dictionary happen after the pool joins.

    Example:
        from trajroute.monitoring import pipeline_stats
        pipeline_stats.safe.increment('routes')
    """

    def __init__(self, stats_dict):
        self._stats = stats_dict
        self._lock = threading.Lock()

    def increment(self, key, value=1):
        """
        Add value to one counter.

        Args:
            key (str): Statistics field to increment
            value (int/float): Amount to increment by (default: 1)
        """
        with self._lock:
            self._stats[key] = self._stats.get(key, 0) + value
