# -*- coding: utf-8 -*-
"""
Pipeline statistics and solver monitoring for the routing pipeline.

This module provides classes for tracking per-stage counters (rejected
records, merges, region edges, learned and transferred preferences, dead
B-edges, routing fallbacks) and conjugate gradient convergence metrics.
"""

import threading
import time

from .thread_utils import ThreadSafeStatsWrapper
from .utils import is_debug_solver_enabled


class SolverMonitor:
    """
    Monitor conjugate gradient convergence per feature column.

    Records iteration counts and final relative residuals so the transfer
    report and the summary can show how hard each column was to solve.
    Columns are solved on parallel workers, so every update holds a lock.
    """

    def __init__(self):
        """Initialize solver metrics"""
        self.metrics = {
            'columns_solved': 0,
            'total_iterations': 0,
            'max_iterations': 0,
            'max_residual': 0.0,
            'failed_columns': 0,
        }
        self.iterations_per_column = {}
        self.residuals = {}
        self._lock = threading.Lock()

    def record_column(self, column, iterations, residual, converged=True):
        """
        Record the outcome of one column solve.

        Args:
            column (int): Feature column index
            iterations (int): CG iterations used
            residual (float): Achieved relative residual
            converged (bool): Whether the acceptance threshold was met
        """
        with self._lock:
            self.iterations_per_column[column] = iterations
            self.residuals[column] = residual
            m = self.metrics
            m['columns_solved'] += 1
            m['total_iterations'] += iterations
            m['max_iterations'] = max(m['max_iterations'], iterations)
            m['max_residual'] = max(m['max_residual'], residual)
            if not converged:
                m['failed_columns'] += 1

        if is_debug_solver_enabled():
            print(f"[DEBUG] Column {column}: {iterations} iterations, residual {residual:.3e}")

    def reset(self):
        """Clear all recorded columns"""
        with self._lock:
            for key in self.metrics:
                self.metrics[key] = 0
            self.metrics['max_residual'] = 0.0
            self.iterations_per_column.clear()
            self.residuals.clear()


# Global solver monitor instance
solver_monitor = SolverMonitor()


class PipelineStatistics:
    """Track statistics for every pipeline stage"""

    def __init__(self):
        """Initialize pipeline statistics"""
        self.stats = {
            # Ingestion
            'trajectories_loaded': 0,
            'trajectories_rejected': 0,
            # Clustering
            'merges': 0,
            'edges_cut': 0,
            'regions': 0,
            'singleton_regions': 0,
            # Region graph
            't_edges': 0,
            'b_edges': 0,
            'transfer_centers': 0,
            'inner_paths': 0,
            # Preferences
            'preferences_learned': 0,
            'single_preference_t_edges': 0,
            'preferences_transferred': 0,
            'null_preferences': 0,
            'populated_paths': 0,
            'dead_b_edges': 0,
            'capped_center_pairs': 0,
            # Routing
            'routes': 0,
            'region_search_fallbacks': 0,
            'unroutable_queries': 0,
        }
        self.stage_times = {}
        self._stage_start = {}
        self.safe = ThreadSafeStatsWrapper(self.stats)

    def start_stage(self, name):
        """Mark the start of a named stage"""
        self._stage_start[name] = time.perf_counter()

    def end_stage(self, name):
        """
        Mark the end of a named stage.

        Returns:
            float: Elapsed seconds for the stage
        """
        started = self._stage_start.pop(name, None)
        if started is None:
            return 0.0
        elapsed = time.perf_counter() - started
        self.stage_times[name] = elapsed
        return elapsed

    def reset(self):
        """Reset all counters (used between pipeline runs and in tests)"""
        for key in self.stats:
            self.stats[key] = 0
        self.stage_times.clear()
        self._stage_start.clear()

    def print_summary(self):
        """
        Print final summary report of pipeline statistics.

        Sections with all-zero counters are omitted.
        """
        s = self.stats
        print(f"[STATS] Pipeline Statistics:")

        if s['trajectories_loaded'] or s['trajectories_rejected']:
            print(f"\n[INGEST] Trajectories:")
            print(f"   - Accepted:                 {s['trajectories_loaded']:>6}")
            print(f"   - Rejected:                 {s['trajectories_rejected']:>6}")

        if s['regions']:
            print(f"\n[CLUSTER] Regions:")
            print(f"   - Merges executed:          {s['merges']:>6}")
            print(f"   - Edges cut:                {s['edges_cut']:>6}")
            print(f"   - Regions:                  {s['regions']:>6}")
            print(f"   - Singleton regions:        {s['singleton_regions']:>6}")

        if s['t_edges'] or s['b_edges']:
            print(f"\n[GRAPH] Region Graph:")
            print(f"   - T-edges:                  {s['t_edges']:>6}")
            print(f"   - B-edges:                  {s['b_edges']:>6}")
            print(f"   - Transfer centers:         {s['transfer_centers']:>6}")
            print(f"   - Inner paths:              {s['inner_paths']:>6}")

        if s['preferences_learned'] or s['preferences_transferred'] or s['null_preferences']:
            print(f"\n[PREF] Preferences:")
            print(f"   - Learned (T-edges):        {s['preferences_learned']:>6}")
            if s['preferences_learned']:
                share = s['single_preference_t_edges'] / s['preferences_learned'] * 100
                print(f"   - Single-preference T-edges:{s['single_preference_t_edges']:>6} ({share:.1f}%)")
            print(f"   - Transferred (B-edges):    {s['preferences_transferred']:>6}")
            print(f"   - Null preferences:         {s['null_preferences']:>6}")
            print(f"   - Populated paths:          {s['populated_paths']:>6}")
            print(f"   - Dead B-edges:             {s['dead_b_edges']:>6}")
            if s['capped_center_pairs']:
                print(f"   - Capped center pairs:      {s['capped_center_pairs']:>6}")

        if s['routes'] or s['unroutable_queries']:
            print(f"\n[ROUTE] Routing:")
            print(f"   - Routes computed:          {s['routes']:>6}")
            print(f"   - Region search fallbacks:  {s['region_search_fallbacks']:>6}")
            print(f"   - Unroutable queries:       {s['unroutable_queries']:>6}")

        if solver_monitor.metrics['columns_solved']:
            m = solver_monitor.metrics
            print(f"\n[SOLVER] Conjugate Gradient:")
            print(f"   - Columns solved:           {m['columns_solved']:>6}")
            print(f"   - Total iterations:         {m['total_iterations']:>6}")
            print(f"   - Max iterations (column):  {m['max_iterations']:>6}")
            print(f"   - Max residual:             {m['max_residual']:.3e}")

        if self.stage_times:
            print(f"\n[TIME] Stage Durations:")
            for name, seconds in self.stage_times.items():
                print(f"   - {f'{name}:':<27} {seconds:>8.2f} s")


# Global pipeline statistics instance
pipeline_stats = PipelineStatistics()


def print_summary():
    """Print the pipeline statistics block with the standard banner."""
    print("\n" + "="*60)
    print("PIPELINE SUMMARY")
    print("="*60)
    pipeline_stats.print_summary()
    print("="*60)
