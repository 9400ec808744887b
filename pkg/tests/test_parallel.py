# -*- coding: utf-8 -*-
"""Tests for the worker pool and thread-safe helpers."""

import builtins
import threading

import pytest

from trajroute.parallel import SEQUENTIAL, ParallelRunner
from trajroute.thread_utils import (
    ThreadSafeStatsWrapper,
    enable_thread_safe_print,
    restore_original_print,
    thread_safe_print,
)


class TestParallelRunner:

    def test_results_keep_input_order(self):
        runner = ParallelRunner(max_workers=4, label="Eval")
        assert runner.map(lambda x: x * x, range(20)) == [x * x for x in range(20)]

    def test_errors_are_collected_per_item(self):
        def work(x):
            if x == 3:
                raise ValueError("bad item")
            return x

        outcomes = ParallelRunner(max_workers=2).run(work, range(5))
        assert [o.ok for o in outcomes] == [True, True, True, False, True]
        assert isinstance(outcomes[3].error, ValueError)

    def test_map_reraises_first_error(self):
        def work(x):
            raise KeyError(x)

        with pytest.raises(KeyError):
            ParallelRunner(max_workers=3).map(work, [1, 2, 3])

    def test_workers_are_named(self):
        names = ParallelRunner(max_workers=2).map(lambda _: threading.current_thread().name,
                                                  range(4), label="Solve")
        assert all(name.startswith("Solve-") for name in names)
        restore_original_print()

    def test_sequential_runs_inline(self):
        assert SEQUENTIAL.map(lambda _: threading.current_thread().name, [0]) == ["MainThread"]

    def test_invalid_worker_count(self):
        with pytest.raises(ValueError):
            ParallelRunner(max_workers=0)


class TestThreadUtils:

    def test_print_swap(self):
        enable_thread_safe_print()
        try:
            assert builtins.print is thread_safe_print
        finally:
            restore_original_print()
        assert builtins.print is not thread_safe_print

    def test_debug_prefix(self, monkeypatch, capsys):
        monkeypatch.setenv("DEBUG", "true")
        thread_safe_print("hello")
        assert capsys.readouterr().out == "[Main] hello\n"

    def test_stats_wrapper_increments_shared_dict(self):
        stats = {"routes": 0}
        wrapper = ThreadSafeStatsWrapper(stats)

        def bump(_):
            for _ in range(100):
                wrapper.increment("routes")

        ParallelRunner(max_workers=4).map(bump, range(8))
        restore_original_print()
        assert stats["routes"] == 800

    def test_stats_wrapper_creates_missing_counter(self):
        stats = {}
        ThreadSafeStatsWrapper(stats).increment("dead_b_edges", 3)
        assert stats == {"dead_b_edges": 3}
