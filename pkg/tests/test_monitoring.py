# -*- coding: utf-8 -*-
"""Tests for solver monitoring, pipeline statistics and file fingerprints."""

import sys

from trajroute.file_handler import calculate_file_hash, changed_inputs, fingerprint_trajectories, hash_input_files
from trajroute.monitoring import pipeline_stats, print_summary, solver_monitor
from trajroute.netmodel import Trajectory, validate_path
from trajroute.parallel import ParallelRunner
from trajroute.thread_utils import restore_original_print


class TestSolverMonitor:

    def test_record_column(self):
        solver_monitor.record_column(0, 12, 1e-11)
        solver_monitor.record_column(1, 30, 5e-7, converged=False)
        m = solver_monitor.metrics
        assert m['columns_solved'] == 2
        assert m['total_iterations'] == 42
        assert m['max_iterations'] == 30
        assert m['max_residual'] == 5e-7
        assert m['failed_columns'] == 1
        assert solver_monitor.iterations_per_column == {0: 12, 1: 30}

    def test_reset(self):
        solver_monitor.record_column(0, 5, 0.0)
        solver_monitor.reset()
        assert solver_monitor.metrics['columns_solved'] == 0
        assert solver_monitor.residuals == {}

    def test_concurrent_columns_keep_exact_totals(self):
        columns = range(400)

        def solve(column):
            for _ in range(5):
                solver_monitor.record_column(column, column % 17 + 1, column * 1e-12, converged=column % 10 != 0)

        interval = sys.getswitchinterval()
        sys.setswitchinterval(1e-6)
        try:
            ParallelRunner(max_workers=8, label="Solve").map(solve, columns)
        finally:
            sys.setswitchinterval(interval)
            restore_original_print()

        m = solver_monitor.metrics
        assert m['columns_solved'] == 2000
        assert m['total_iterations'] == 5 * sum(c % 17 + 1 for c in columns)
        assert m['max_iterations'] == 17
        assert m['max_residual'] == 399 * 1e-12
        assert m['failed_columns'] == 5 * 40
        assert len(solver_monitor.iterations_per_column) == 400

    def test_pipeline_counters_from_workers(self):
        ParallelRunner(max_workers=8, label="Eval").map(
            lambda _: [pipeline_stats.safe.increment('routes') for _ in range(50)], range(40))
        restore_original_print()
        assert pipeline_stats.stats['routes'] == 2000


class TestPipelineStatistics:

    def test_summary_omits_empty_sections(self, capsys):
        pipeline_stats.stats['regions'] = 4
        pipeline_stats.stats['merges'] = 9
        print_summary()
        out = capsys.readouterr().out
        assert "PIPELINE SUMMARY" in out
        assert "[CLUSTER] Regions:" in out
        assert "[ROUTE]" not in out
        assert "[SOLVER]" not in out

    def test_stage_timer(self):
        pipeline_stats.start_stage("Clustering")
        assert pipeline_stats.end_stage("Clustering") >= 0.0
        assert "Clustering" in pipeline_stats.stage_times
        assert pipeline_stats.end_stage("never started") == 0.0


class TestFingerprints:

    def test_order_does_not_matter(self, toy_net):
        a = Trajectory(1, 0, 100, validate_path(toy_net, [0, 2]))
        b = Trajectory(2, 0, 200, validate_path(toy_net, [0, 6, 5]))
        assert fingerprint_trajectories([a, b]) == fingerprint_trajectories([b, a])
        assert len(fingerprint_trajectories([a])) == 32

    def test_any_change_alters_fingerprint(self, toy_net):
        a = Trajectory(1, 0, 100, validate_path(toy_net, [0, 2]))
        moved = Trajectory(1, 0, 101, validate_path(toy_net, [0, 2]))
        assert fingerprint_trajectories([a]) != fingerprint_trajectories([moved])

    def test_file_hash(self, tmp_path):
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        first.write_text("node_id,lon,lat\n")
        second.write_text("node_id,lon,lat\n")
        assert calculate_file_hash(str(first)) == calculate_file_hash(str(second))
        assert calculate_file_hash(str(tmp_path / "missing.csv")) is None

    def test_file_hash_spans_blocks(self, tmp_path, monkeypatch):
        import trajroute.file_handler as file_handler
        path = tmp_path / "big.bin"
        path.write_bytes(bytes(range(256)) * 10)
        whole = calculate_file_hash(str(path))
        monkeypatch.setattr(file_handler, "HASH_BLOCK_BYTES", 7)
        assert calculate_file_hash(str(path)) == whole

    def test_changed_inputs(self, tmp_path):
        nodes = tmp_path / "nodes.csv"
        traj = tmp_path / "trajectories.jsonl"
        nodes.write_text("node_id,lon,lat\n")
        traj.write_text('{"traj_id": 1}\n')
        paths = {"nodes": str(nodes), "trajectories": str(traj)}
        recorded = hash_input_files(paths)
        assert set(recorded) == {"nodes", "trajectories"}
        assert changed_inputs(recorded, paths) == []

        traj.write_text('{"traj_id": 2}\n')
        assert changed_inputs(recorded, paths) == ["trajectories"]
        # roles without a recorded digest are never reported
        assert changed_inputs({}, paths) == []
