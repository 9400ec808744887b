# -*- coding: utf-8 -*-
"""
Evaluation of routing quality against held-out trajectories.

Trajectories are split by departure time. For every test trajectory the
learned router, the shortest path and the fastest path are computed between
its endpoints and compared with the trajectory's own path using both path
similarity measures. Results are bucketed by ground-truth distance and by
the region category of the query endpoints.
"""

import csv
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .file_handler import fingerprint_trajectories
from .monitoring import pipeline_stats
from .netmodel import CostKind, NoPathError, path_cost
from .parallel import SEQUENTIAL
from .preference import psim_intersection, psim_union
from .router import IN_OUT_REGION, IN_REGION, OUT_REGION, NoRouteError, StitchError, route
from .search import fastest_path, shortest_path
from .utils import is_debug_enabled

L2R = "L2R"
SHORTEST = "Shortest"
FASTEST = "Fastest"
METHODS = (L2R, SHORTEST, FASTEST)

METRICS = {
    "psim_intersection": psim_intersection,
    "psim_union": psim_union,
}

DEFAULT_DISTANCE_BANDS_KM = (0.0, 2.0, 5.0, 10.0, 35.0)
CATEGORIES = (IN_REGION, IN_OUT_REGION, OUT_REGION)

REPORT_COLUMNS = ("method", "metric", "bucket_kind", "bucket", "mean", "n", "mean_query_ms")


class TrainingLeakError(ValueError):
    """The model was not built from the training split being evaluated against."""


def split_train_test(trajectories, boundary):
    """
    Split trajectories by departure time.

    Args:
        trajectories (iterable[Trajectory]): All trajectories
        boundary (int): Epoch seconds; departures before it are training data

    Returns:
        tuple: (train, test) lists in input order
    """
    train, test = [], []
    for traj in trajectories:
        (train if traj.departure < boundary else test).append(traj)
    return train, test


def parse_distance_bands(text):
    """Parse "0,2,5,10,35" into a sorted tuple of band edges in km."""
    values = tuple(float(v) for v in str(text).split(",") if v.strip())
    if len(values) < 2 or list(values) != sorted(values) or len(set(values)) != len(values):
        raise ValueError(f"distance bands must be at least two increasing values, got {text!r}")
    return values


def _fmt(value):
    return f"{value:g}"


def distance_bucket(distance_km, bands=DEFAULT_DISTANCE_BANDS_KM):
    """Bucket label such as "(2,5]" or ">35" for a ground-truth distance."""
    for lo, hi in zip(bands, bands[1:]):
        if distance_km <= hi:
            return f"({_fmt(lo)},{_fmt(hi)}]"
    return f">{_fmt(bands[-1])}"


def distance_bucket_labels(bands=DEFAULT_DISTANCE_BANDS_KM):
    labels = [f"({_fmt(lo)},{_fmt(hi)}]" for lo, hi in zip(bands, bands[1:])]
    labels.append(f">{_fmt(bands[-1])}")
    return labels


def query_category(model, s, d):
    """Region category of a query by the region membership of its endpoints."""
    inside = (s in model.region_of) + (d in model.region_of)
    return {2: IN_REGION, 1: IN_OUT_REGION, 0: OUT_REGION}[inside]


@dataclass
class QueryOutcome:
    traj_id: int
    category: str
    bucket: str
    scores: dict = field(default_factory=dict)
    times_ms: dict = field(default_factory=dict)


@dataclass
class EvaluationReport:
    rows: list
    scored: int
    unroutable: int
    skipped: int
    category_counts: dict

    def to_dict(self):
        return {
            "scored": self.scored,
            "unroutable": self.unroutable,
            "skipped": self.skipped,
            "category_counts": dict(self.category_counts),
            "rows": [dict(zip(REPORT_COLUMNS, row)) for row in self.rows],
        }

    def mean(self, method, metric="psim_intersection", bucket_kind="all", bucket="all"):
        """Mean score of one report cell, or None if the cell is empty."""
        for row in self.rows:
            if row[:4] == (method, metric, bucket_kind, bucket):
                return row[4]
        return None


def _timed(fn):
    started = time.perf_counter()
    result = fn()
    return result, (time.perf_counter() - started) * 1000.0


def _evaluate_one(model, net, traj, metrics, methods, bands):
    gt = traj.path
    s, d = gt.source, gt.target
    solvers = {
        L2R: lambda: route(model, net, s, d, traj.departure).path,
        SHORTEST: lambda: shortest_path(net, s, d),
        FASTEST: lambda: fastest_path(net, s, d),
    }
    outcome = QueryOutcome(
        traj_id=traj.traj_id,
        category=query_category(model, s, d),
        bucket=distance_bucket(path_cost(net, gt, CostKind.DI) / 1000.0, bands),
    )
    for method in methods:
        try:
            candidate, elapsed = _timed(solvers[method])
        except (NoPathError, NoRouteError, StitchError) as e:
            if is_debug_enabled():
                print(f"[DEBUG] Query {traj.traj_id} unroutable by {method}: {e}")
            return None
        outcome.times_ms[method] = elapsed
        for name in metrics:
            outcome.scores[(method, name)] = METRICS[name](net, gt, candidate)
    return outcome


def evaluate(model, net, test, metrics=tuple(METRICS), baselines=(SHORTEST, FASTEST),
             bands=DEFAULT_DISTANCE_BANDS_KM, runner=SEQUENTIAL, model_fingerprint=None, train=None):
    """
    Score the learned router and the baselines on test trajectories.

    A query that any method cannot route is counted as unroutable and left
    out of every mean, so all methods are compared on the same queries.
    Test trajectories without road edges are skipped.

    Args:
        model (RegionGraphModel): Model built from the training split
        net (RoadNetwork): Road network
        test (list[Trajectory]): Held-out trajectories
        metrics (iterable[str]): Metric names from METRICS
        baselines (iterable[str]): Baseline methods to compare with L2R
        bands (tuple): Distance band edges in km
        runner (ParallelRunner): Executor for the per-query evaluation
        model_fingerprint (str): Fingerprint stored with the model
        train (list[Trajectory]): Training split to check the fingerprint against

    Returns:
        EvaluationReport: Rows (method, metric, bucket_kind, bucket, mean, n, mean_query_ms)

    Raises:
        TrainingLeakError: If model_fingerprint does not match the training split
        ValueError: On an unknown metric or baseline
    """
    if model_fingerprint is not None and train is not None:
        actual = fingerprint_trajectories(train)
        if actual != model_fingerprint:
            raise TrainingLeakError(
                f"model fingerprint {model_fingerprint} does not match training split {actual}"
            )
    metrics = tuple(metrics)
    for name in metrics:
        if name not in METRICS:
            raise ValueError(f"unknown metric {name!r}")
    methods = (L2R,) + tuple(b for b in baselines if b != L2R)
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")

    queries = [t for t in test if t.path.edges]
    skipped = len(test) - len(queries)
    outcomes = runner.map(lambda t: _evaluate_one(model, net, t, metrics, methods, bands),
                          queries, label="Eval")
    scored = [o for o in outcomes if o is not None]
    unroutable = len(outcomes) - len(scored)
    pipeline_stats.safe.increment('unroutable_queries', unroutable)

    groups = [("all", "all", lambda o: True)]
    groups += [("distance", b, lambda o, b=b: o.bucket == b) for b in distance_bucket_labels(bands)]
    groups += [("category", c, lambda o, c=c: o.category == c) for c in CATEGORIES]

    rows = []
    for method in methods:
        for name in metrics:
            for kind, bucket, member in groups:
                selected = [o for o in scored if member(o)]
                if selected:
                    mean = float(np.mean([o.scores[(method, name)] for o in selected]))
                    mean_ms = float(np.mean([o.times_ms[method] for o in selected]))
                else:
                    mean, mean_ms = None, None
                rows.append((method, name, kind, bucket, mean, len(selected), mean_ms))

    counts = {c: sum(1 for o in scored if o.category == c) for c in CATEGORIES}
    return EvaluationReport(rows=rows, scored=len(scored), unroutable=unroutable,
                            skipped=skipped, category_counts=counts)


def write_report(report, out_dir):
    """
    Write report.json and report.csv into out_dir.

    Returns:
        tuple: (json_path, csv_path)
    """
    os.makedirs(out_dir, exist_ok=True)
    json_path = os.path.join(out_dir, "report.json")
    csv_path = os.path.join(out_dir, "report.csv")

    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")

    with open(csv_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for row in report.rows:
            writer.writerow(["" if v is None else v for v in row])

    return json_path, csv_path


def print_report(report, metric="psim_intersection"):
    """Print the headline means per method and category."""
    print(f"[STATS] Evaluation ({metric}):")
    print(f"   - Scored queries:           {report.scored:>6}")
    print(f"   - Unroutable queries:       {report.unroutable:>6}")
    if report.skipped:
        print(f"   - Skipped (no edges):       {report.skipped:>6}")
    methods = []
    for row in report.rows:
        if row[0] not in methods:
            methods.append(row[0])
    for method in methods:
        overall = report.mean(method, metric)
        text = "n/a" if overall is None else f"{overall:.4f}"
        print(f"   - {f'{method}:':<26}{text:>8}")
    for category in CATEGORIES:
        n = report.category_counts.get(category, 0)
        print(f"   - {f'{category} queries:':<26}{n:>8}")
