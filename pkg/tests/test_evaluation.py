# -*- coding: utf-8 -*-
"""Tests for the train/test split, baselines and evaluation reports."""

import csv
import dataclasses
import json

import pytest

from trajroute import evaluation
from trajroute.evaluation import (
    FASTEST,
    L2R,
    SHORTEST,
    TrainingLeakError,
    distance_bucket,
    evaluate,
    parse_distance_bands,
    print_report,
    query_category,
    split_train_test,
    write_report,
)
from trajroute.file_handler import fingerprint_trajectories
from trajroute.ingest import SyntheticConfig, generate_synthetic
from trajroute.netmodel import CostKind, Trajectory, validate_path
from trajroute.preference import PreferenceVector
from trajroute.region_graph import build_region_graph
from trajroute.router import NoRouteError


def _traj(net, traj_id, vertices, departure=0):
    return Trajectory(traj_id, 0, departure, validate_path(net, vertices))


@pytest.fixture
def test_set(line_net):
    return [
        _traj(line_net, 1, range(9)),       # crosses all three regions
        _traj(line_net, 2, [3, 4, 5]),      # inside R1
        _traj(line_net, 3, [9, 0]),         # enters R0 from outside
        _traj(line_net, 4, [4]),            # no road edges
    ]


class TestSplit:

    def test_boundary_goes_to_test(self, line_net):
        trajectories = [_traj(line_net, i, [0, 1], departure=d) for i, d in enumerate((5, 10, 15))]
        train, test = split_train_test(trajectories, 10)
        assert [t.departure for t in train] == [5]
        assert [t.departure for t in test] == [10, 15]


class TestBuckets:

    @pytest.mark.parametrize("km, label", [(0.0, "(0,2]"), (2.0, "(0,2]"), (2.1, "(2,5]"),
                                           (35.0, "(10,35]"), (40.0, ">35")])
    def test_distance_bucket(self, km, label):
        assert distance_bucket(km) == label

    def test_parse_bands(self):
        assert parse_distance_bands("0, 1.5, 4") == (0.0, 1.5, 4.0)
        with pytest.raises(ValueError):
            parse_distance_bands("5,2")
        with pytest.raises(ValueError):
            parse_distance_bands("3")

    def test_query_category(self, three_region_model):
        assert query_category(three_region_model, 0, 8) == "InRegion"
        assert query_category(three_region_model, 9, 8) == "InOutRegion"
        assert query_category(three_region_model, 9, 9) == "OutRegion"


class TestEvaluate:

    def test_means_per_method(self, line_net, three_region_model, test_set):
        report = evaluate(three_region_model, line_net, test_set)

        assert report.scored == 3
        assert report.skipped == 1
        assert report.unroutable == 0
        assert report.category_counts == {"InRegion": 2, "InOutRegion": 1, "OutRegion": 0}
        assert report.mean(L2R) == pytest.approx(1.0)
        # the shortest path takes the motorway shortcut 3→5
        assert report.mean(SHORTEST) == pytest.approx((0.75 + 0.0 + 1.0) / 3)
        assert report.mean(FASTEST, bucket_kind="category", bucket="InRegion") == pytest.approx(0.375)
        assert report.mean(L2R, "psim_union", "distance", "(0,2]") == pytest.approx(1.0)
        assert report.mean(L2R, bucket_kind="category", bucket="OutRegion") is None

    def test_query_failing_for_any_method_is_excluded(self, monkeypatch, line_net,
                                                      three_region_model, test_set):
        original = evaluation.route

        def flaky(model, net, s, d, departure=None):
            if s == 3:
                raise NoRouteError(1, 1)
            return original(model, net, s, d, departure)

        monkeypatch.setattr(evaluation, "route", flaky)
        report = evaluate(three_region_model, line_net, test_set)
        assert report.unroutable == 1
        assert report.scored == 2
        assert report.mean(SHORTEST) == pytest.approx((0.75 + 1.0) / 2)

    def test_fingerprint_must_match_training_split(self, line_net, three_region_model, test_set):
        train = [_traj(line_net, 10, [0, 1, 2])]
        fingerprint = fingerprint_trajectories(train)
        evaluate(three_region_model, line_net, test_set, model_fingerprint=fingerprint, train=train)
        with pytest.raises(TrainingLeakError):
            evaluate(three_region_model, line_net, test_set, model_fingerprint=fingerprint,
                     train=train + [test_set[0]])

    def test_unknown_metric(self, line_net, three_region_model, test_set):
        with pytest.raises(ValueError):
            evaluate(three_region_model, line_net, test_set, metrics=("edit_distance",))


class TestReportOutput:

    def test_files(self, tmp_path, line_net, three_region_model, test_set):
        report = evaluate(three_region_model, line_net, test_set, baselines=(FASTEST,))
        json_path, csv_path = write_report(report, str(tmp_path / "eval"))

        document = json.loads(open(json_path, encoding="utf-8").read())
        assert document["scored"] == 3
        assert {row["method"] for row in document["rows"]} == {L2R, FASTEST}

        with open(csv_path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["method", "metric", "bucket_kind", "bucket", "mean", "n", "mean_query_ms"]
        empty = [r for r in rows[1:] if r[3] == "OutRegion"]
        assert empty and all(r[4] == "" and r[5] == "0" for r in empty)

    def test_print_report(self, capsys, line_net, three_region_model, test_set):
        print_report(evaluate(three_region_model, line_net, test_set))
        out = capsys.readouterr().out
        assert "Scored queries:" in out
        assert "L2R:" in out
        assert "Skipped (no edges):" in out


class TestPlantedWorld:

    def test_learned_router_beats_both_baselines(self, block_regions):
        # one-vertex blocks pin the two OD pairs: a DI route along row 1 and
        # a TT route over the primary row 8; regions are 3x3 squares
        cfg = SyntheticConfig(
            grid_rows=9, grid_cols=9, block_size=1, trajectory_count=40, rng_seed=9,
            planted_preferences={
                ((1, 0), (1, 8)): PreferenceVector(CostKind.DI),
                ((7, 0), (7, 8)): PreferenceVector(CostKind.TT),
            },
            restrict_to_planted=True, detour_noise=0.0,
        )
        world = generate_synthetic(cfg)
        net = world.network
        train, test = split_train_test(world.trajectories, world.trajectories[30].departure)
        regions = block_regions(dataclasses.replace(cfg, block_size=3), net)
        model = build_region_graph(net, regions, train)

        report = evaluate(model, net, test)
        assert report.scored == len(test)
        learned = report.mean(L2R)
        assert learned == pytest.approx(1.0)
        assert learned > report.mean(SHORTEST)
        assert learned > report.mean(FASTEST)
