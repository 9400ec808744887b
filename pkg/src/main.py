#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Trajectory-Based Routing Pipeline
=================================

PURPOSE:
    Learns routing preferences from historical map-matched trajectories and
    answers routing queries with them. The pipeline clusters the road
    network into regions along popular trajectory edges, builds a region
    graph, learns one preference per trajectory-backed region edge,
    transfers preferences to the remaining region edges and routes over the
    result.

SYNOPSIS:
    python main.py synth    --config F --out DIR
    python main.py build    --nodes F --edges F --traj F [--window HH:MM-HH:MM]
                            [--boundary T] --out model.json
    python main.py transfer --model F [--amr X] [--mu1 X] [--mu2 X] [--k N]
                            [--holdout] --out F
    python main.py route    --model F --from ID --to ID [--depart T]
    python main.py eval     --model F --traj F --boundary T --out DIR

    Shared options: --config F (key=value settings), --threads N, --debug

SUBCOMMANDS:
    synth
        Generate a synthetic grid world from a key=value file and write
        nodes.csv, edges.csv, trajectories.jsonl and ground_truth.json.

    build
        Load the network and trajectories, cluster regions, build the region
        graph (T-edges and B-edges) and write the model with stage "built"
        and the xxh128 digests of the three input files.
        regions.json and region_graph.json are written next to the model.
        --boundary T keeps only trajectories departing before T, so that
        `eval --boundary T` can verify the model was built from that split.

    transfer
        Learn T-edge preferences, transfer them to B-edges, populate B-edge
        paths and write the model with stage "transferred", together with
        transfer_report.json and preferences.json. --holdout adds the
        five-partition hold-out accuracy and an amr sweep to the report.

    route
        Answer one query. Only the JSON result goes to stdout:
        {"path": [node ids], "tag": ..., "costs": {"DI":..,"TT":..,"FC":..}}

    eval
        Split trajectories at --boundary, check the model fingerprint against
        the training part, warn when the trajectory file differs from the one
        recorded at build time, score L2R, Shortest and Fastest on the test
        part and write report.json and report.csv.

EXIT CODES:
    0 - Success
    1 - Usage error (unknown flag, missing argument, invalid setting)
    2 - Data error (missing file, malformed input, unknown vertex,
        fingerprint mismatch, no path)
    3 - Transfer solver did not converge

ENVIRONMENT:
    DEBUG=true           Verbose per-stage output (same as --debug)
    DEBUG_SOLVER=true    Per-column conjugate gradient progress
"""

# ====================================
# IMPORTS
# ====================================

import argparse
import contextlib
import json
import os
import sys
import time

import numpy as np

from trajroute.apply_pref import populate_b_edge_paths
from trajroute.artifact import (
    STAGE_BUILT, STAGE_TRANSFERRED, ModelArtifact, ModelFormatError,
    export_preferences, export_region_graph, export_regions, load_model, save_model,
)
from trajroute.clustering import bottom_up_clustering, build_trajectory_graph, size_histogram
from trajroute.config import Config, load_synthetic_config, parse_config
from trajroute.evaluation import TrainingLeakError, evaluate, print_report, split_train_test, write_report
from trajroute.file_handler import changed_inputs, fingerprint_trajectories, hash_input_files
from trajroute.ingest import (
    DataFormatError, SyntheticGenerationError, TimeWindow, generate_synthetic,
    load_road_network, load_trajectories, save_road_network, save_trajectories,
)
from trajroute.monitoring import pipeline_stats, print_summary
from trajroute.netmodel import NoPathError
from trajroute.preference import learn_all_preferences
from trajroute.region_graph import build_region_graph
from trajroute.router import NoRouteError, StitchError, route
from trajroute.transfer import TransferSolverError, transfer_holdout, transfer_preferences
from trajroute.utils import format_ms, is_debug_enabled

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_SOLVER = 3

HOLDOUT_AMR_SWEEP = (0.5, 0.7, 0.9)


class UsageError(Exception):
    """Command line could not be parsed."""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with code 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ====================================================================
# OUTPUT HELPERS
# ====================================================================

def banner(title):
    print("\n" + "="*60)
    print(title)
    print("="*60)


def print_error_box(title, message, hints=(), stream=None):
    """Print a boxed [!] error block with troubleshooting hints."""
    stream = stream or sys.stderr
    lines = [
        "[!] ========================================",
        f"[!] {title}",
        "[!] ========================================",
        f"[!] {message}",
    ]
    if hints:
        lines.append("[!] ")
        lines.append("[!] Troubleshooting steps:")
        lines.extend(f"[!]   {i}. {hint}" for i, hint in enumerate(hints, start=1))
    lines.append("[!] ========================================")
    for line in lines:
        print(line, file=stream)


def _require_file(path, what):
    if not os.path.isfile(path):
        raise FileNotFoundError(f"{what} not found: {path}")


def _write_json(document, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(document, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")


def _output_dir(path):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    return directory


# ====================================================================
# ARGUMENTS
# ====================================================================

def build_parser():
    """
    Build the command-line parser.

    Flags that map to Config fields default to None so that a config file
    value is only overridden when the flag is given.
    """
    shared = _Parser(add_help=False)
    shared.add_argument("--config", help="key=value settings file (python-dotenv format)")
    shared.add_argument("--threads", type=int, default=None,
                        help="worker threads per parallel stage (default: min(4, cpu_count))")
    shared.add_argument("--debug", action="store_true", default=None, help="verbose output")

    parser = _Parser(prog="main.py", description="Trajectory-based routing pipeline")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    synth = sub.add_parser("synth", parents=[shared], help="generate a synthetic world")
    synth.add_argument("--out", required=True, help="output directory")

    build = sub.add_parser("build", parents=[shared], help="cluster regions and build the region graph")
    build.add_argument("--nodes", required=True, help="nodes.csv")
    build.add_argument("--edges", required=True, help="edges.csv")
    build.add_argument("--traj", required=True, help="trajectories.jsonl")
    build.add_argument("--window", dest="time_window", default=None,
                       help="departure time-of-day window HH:MM-HH:MM (UTC)")
    build.add_argument("--boundary", type=int, default=None,
                       help="only use trajectories departing before this epoch second")
    build.add_argument("--out", required=True, help="model file to write")

    transfer = sub.add_parser("transfer", parents=[shared], help="learn, transfer and apply preferences")
    transfer.add_argument("--model", required=True, help="model file from build")
    transfer.add_argument("--amr", type=float, default=None, help="similarity threshold (default: 0.7)")
    transfer.add_argument("--mu1", type=float, default=None, help="smoothness weight (default: 1.0)")
    transfer.add_argument("--mu2", type=float, default=None, help="norm weight (default: 0.01)")
    transfer.add_argument("--k", dest="top_k", type=int, default=None,
                          help="road types per region in edge features (default: 2)")
    transfer.add_argument("--holdout", action="store_true",
                          help="add hold-out accuracy and an amr sweep to the report")
    transfer.add_argument("--holdout-seeds", type=int, default=10, help="shuffles per hold-out setting")
    transfer.add_argument("--out", required=True, help="model file to write")

    route_cmd = sub.add_parser("route", parents=[shared], help="answer one routing query")
    route_cmd.add_argument("--model", required=True, help="model file")
    route_cmd.add_argument("--from", dest="source", type=int, required=True, help="source node id")
    route_cmd.add_argument("--to", dest="target", type=int, required=True, help="destination node id")
    route_cmd.add_argument("--depart", type=int, default=None, help="departure time (epoch seconds)")

    eval_cmd = sub.add_parser("eval", parents=[shared], help="evaluate against held-out trajectories")
    eval_cmd.add_argument("--model", required=True, help="model file")
    eval_cmd.add_argument("--traj", required=True, help="trajectories.jsonl (train and test)")
    eval_cmd.add_argument("--boundary", type=int, required=True,
                          help="epoch second splitting train (before) from test")
    eval_cmd.add_argument("--out", required=True, help="output directory for report.json/report.csv")
    return parser


# ====================================================================
# SUBCOMMANDS
# ====================================================================

def cmd_synth(args, config):
    banner("[1/2] GENERATING SYNTHETIC WORLD")
    cfg = load_synthetic_config(args.config)
    print(f"[*] Grid {cfg.grid_rows}x{cfg.grid_cols}, {cfg.trajectory_count} trajectories, seed {cfg.rng_seed}")
    world = generate_synthetic(cfg)
    print(f"[✓] {world.network.num_vertices} vertices, {world.network.num_edges} edges, "
          f"{len(world.trajectories)} trajectories ({len(world.detoured)} detoured)")

    banner("[2/2] WRITING FILES")
    os.makedirs(args.out, exist_ok=True)
    save_road_network(world.network, os.path.join(args.out, "nodes.csv"), os.path.join(args.out, "edges.csv"))
    save_trajectories(world.trajectories, world.network, os.path.join(args.out, "trajectories.jsonl"))
    truth = {
        "block_preferences": [
            {"from": list(a), "to": list(b), "preference": v.to_dict()}
            for (a, b), v in sorted(world.block_preferences.items())
        ],
        "detoured": sorted(world.detoured),
        "block_size": cfg.block_size,
        "grid_cols": cfg.grid_cols,
    }
    _write_json(truth, os.path.join(args.out, "ground_truth.json"))
    print(f"[✓] Wrote nodes.csv, edges.csv, trajectories.jsonl, ground_truth.json to {args.out}")
    return EXIT_OK


def cmd_build(args, config):
    banner("[1/4] LOADING INPUTS")
    pipeline_stats.start_stage("load")
    for path, what in ((args.nodes, "nodes file"), (args.edges, "edges file"), (args.traj, "trajectory file")):
        _require_file(path, what)
    net = load_road_network(args.nodes, args.edges, fuel_model=config.fuel_model())
    print(f"[✓] Road network: {net.num_vertices} vertices, {net.num_edges} directed edges")
    trajectories, rejects = load_trajectories(args.traj, net, time_window=config.window())
    print(f"[✓] Trajectories: {rejects.accepted} accepted, {len(rejects.rejected)} rejected")
    if args.boundary is not None:
        trajectories, held_out = split_train_test(trajectories, args.boundary)
        print(f"[=] Boundary {args.boundary}: {len(trajectories)} training, {len(held_out)} held out")
    inputs = hash_input_files({"nodes": args.nodes, "edges": args.edges, "trajectories": args.traj})
    if is_debug_enabled():
        for role, digest in inputs.items():
            print(f"[DEBUG] {role}: xxh128 {digest}")
    pipeline_stats.end_stage("load")

    banner("[2/4] CLUSTERING REGIONS")
    pipeline_stats.start_stage("cluster")
    graph = build_trajectory_graph(net, trajectories)
    print(f"[*] Trajectory graph: {len(graph.vertices)} vertices, {graph.edge_count} edges")
    regions = bottom_up_clustering(graph)
    print(f"[✓] {len(regions)} regions ({pipeline_stats.stats['singleton_regions']} singletons)")
    pipeline_stats.end_stage("cluster")

    banner("[3/4] BUILDING REGION GRAPH")
    pipeline_stats.start_stage("region graph")
    model = build_region_graph(net, regions, trajectories, runner=config.runner("BFS"))
    print(f"[✓] {len(model.t_edges())} T-edges, {len(model.b_edges())} B-edges")
    pipeline_stats.end_stage("region graph")

    banner("[4/4] WRITING MODEL")
    artifact = ModelArtifact(
        net=net,
        model=model,
        fingerprint=fingerprint_trajectories(trajectories),
        stage=STAGE_BUILT,
        feature_space=config.feature_space(),
        time_window=config.time_window or None,
        boundary=args.boundary,
        params={"fuel_a": config.fuel_a, "fuel_b": config.fuel_b, "fuel_c": config.fuel_c},
        inputs=inputs,
    )
    save_model(artifact, args.out)
    directory = _output_dir(args.out)
    sizes = export_regions(regions, net, os.path.join(directory, "regions.json"))
    export_region_graph(model, net, os.path.join(directory, "region_graph.json"))
    print(f"[✓] Model written to {args.out} (fingerprint {artifact.fingerprint})")
    histogram = size_histogram(sizes)
    print("[=] Region areas (km²): " + ", ".join(f"{k}: {v}" for k, v in histogram.items()))

    print_summary()
    return EXIT_OK


def _holdout_report(model, feature_space, config, seeds):
    t_edges = [e for e in model.t_edges() if e.preference is not None and e.features is not None]
    features = [e.features for e in t_edges]
    preferences = [e.preference for e in t_edges]
    if len(t_edges) < 5:
        print(f"[!] Hold-out skipped: {len(t_edges)} T-edges with preferences (need 5)")
        return None

    def averaged(train_partitions, amr):
        results = [transfer_holdout(features, preferences, feature_space, train_partitions, seed,
                                    amr, config.mu1, config.mu2) for seed in range(seeds)]
        return {
            "train_partitions": train_partitions,
            "amr": amr,
            "accuracy": float(np.mean([r.accuracy for r in results])),
            "null_rate": float(np.mean([r.null_rate for r in results])),
            "nnz": float(np.mean([r.nnz for r in results])),
            "seeds": seeds,
        }

    by_partitions = [averaged(k, config.amr) for k in range(1, 5)]
    by_amr = [averaged(4, amr) for amr in HOLDOUT_AMR_SWEEP]
    for row in by_partitions:
        print(f"[=] Hold-out {row['train_partitions']}/5 seeds: accuracy {row['accuracy']:.3f}, "
              f"null rate {row['null_rate']:.3f}")
    for row in by_amr:
        print(f"[=] amr {row['amr']:.1f}: nnz {row['nnz']:.0f}, null rate {row['null_rate']:.3f}")
    return {"by_partitions": by_partitions, "by_amr": by_amr}


def cmd_transfer(args, config):
    banner("[1/4] LOADING MODEL")
    _require_file(args.model, "model file")
    artifact = load_model(args.model)
    net, model = artifact.net, artifact.model
    feature_space = artifact.feature_space
    print(f"[✓] Model stage '{artifact.stage}': {len(model.regions)} regions, "
          f"{len(model.t_edges())} T-edges, {len(model.b_edges())} B-edges")

    banner("[2/4] LEARNING PREFERENCES")
    pipeline_stats.start_stage("learn")
    learned = learn_all_preferences(net, model, feature_space, runner=config.runner("Learn"))
    print(f"[✓] Learned {learned['learned']} preferences")
    if learned["single_preference_rate"] is not None:
        print(f"[=] Single-preference T-edges: {learned['single_preference_rate'] * 100:.1f}%")
    pipeline_stats.end_stage("learn")

    banner("[3/4] TRANSFERRING PREFERENCES")
    pipeline_stats.start_stage("transfer")
    report = transfer_preferences(
        net, model, feature_space, amr=config.amr, mu1=config.mu1, mu2=config.mu2, k=config.top_k,
        tol=config.solver_tol, maxiter=config.solver_maxiter, epsilon=config.null_epsilon,
        runner=config.runner("Solve"),
    )
    print(f"[✓] Solved n={report['n']}, p={report['p']}, nnz={report['nnz']} "
          f"in {format_ms(report['wall_time_ms'] / 1000.0)}")
    print(f"[=] Null B-edge preferences: {report['null_rate'] * 100:.1f}%")
    report["learning"] = learned
    if args.holdout:
        report["holdout"] = _holdout_report(model, feature_space, config, args.holdout_seeds)
    pipeline_stats.end_stage("transfer")

    banner("[4/4] APPLYING PREFERENCES")
    pipeline_stats.start_stage("populate")
    populate_b_edge_paths(net, model, runner=config.runner("Populate"), cap=config.center_cap)
    dead = sum(1 for e in model.b_edges() if e.dead)
    print(f"[✓] Populated B-edges ({dead} dead)")
    pipeline_stats.end_stage("populate")

    artifact.stage = STAGE_TRANSFERRED
    artifact.params.update(amr=config.amr, mu1=config.mu1, mu2=config.mu2, top_k=config.top_k,
                           center_cap=config.center_cap)
    save_model(artifact, args.out)
    directory = _output_dir(args.out)
    _write_json(report, os.path.join(directory, "transfer_report.json"))
    export_preferences(model, os.path.join(directory, "preferences.json"))
    print(f"[✓] Model written to {args.out}")

    print_summary()
    return EXIT_OK


def cmd_route(args, config):
    # Diagnostics go to stderr; stdout carries only the JSON result
    with contextlib.redirect_stdout(sys.stderr):
        _require_file(args.model, "model file")
        artifact = load_model(args.model)
        net = artifact.net
        s = net.dense_vertex_id(args.source)
        d = net.dense_vertex_id(args.target)
        if artifact.stage != STAGE_TRANSFERRED:
            print("[!] Model has not been through 'transfer'; B-edges carry no paths")
        if args.depart is not None and artifact.time_window:
            if not TimeWindow.parse(artifact.time_window).contains(args.depart):
                print(f"[!] Departure {args.depart} is outside the model's window {artifact.time_window}")
        started = time.perf_counter()
        result = route(artifact.model, net, s, d, args.depart)
        if is_debug_enabled():
            print(f"[DEBUG] {result.tag} in {format_ms(time.perf_counter() - started)}")
    print(json.dumps(result.to_json(net), sort_keys=True, ensure_ascii=False))
    return EXIT_OK


def cmd_eval(args, config):
    banner("[1/3] LOADING INPUTS")
    _require_file(args.model, "model file")
    _require_file(args.traj, "trajectory file")
    artifact = load_model(args.model)
    if artifact.boundary is not None and artifact.boundary != args.boundary:
        print(f"[!] Model was built with boundary {artifact.boundary}, evaluating with {args.boundary}")
    if changed_inputs(artifact.inputs, {"trajectories": args.traj}):
        print(f"[!] {args.traj} differs from the trajectory file the model was built from "
              f"(xxh128 {artifact.inputs['trajectories']})")
    window = None
    if artifact.time_window:
        window = TimeWindow.parse(artifact.time_window)
    trajectories, rejects = load_trajectories(args.traj, artifact.net, time_window=window)
    train, test = split_train_test(trajectories, args.boundary)
    print(f"[✓] {len(train)} training and {len(test)} test trajectories ({len(rejects.rejected)} rejected)")

    banner("[2/3] EVALUATING")
    pipeline_stats.start_stage("evaluate")
    report = evaluate(artifact.model, artifact.net, test, bands=config.distance_bands(),
                      runner=config.runner("Eval"), model_fingerprint=artifact.fingerprint, train=train)
    pipeline_stats.end_stage("evaluate")
    print_report(report)

    banner("[3/3] WRITING REPORT")
    json_path, csv_path = write_report(report, args.out)
    print(f"[✓] Wrote {json_path} and {csv_path}")

    print_summary()
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "build": cmd_build,
    "transfer": cmd_transfer,
    "route": cmd_route,
    "eval": cmd_eval,
}


# ====================================================================
# ENTRY POINT
# ====================================================================

def run(argv=None):
    """
    Run one subcommand.

    Args:
        argv (list[str]): Arguments without the program name (default: sys.argv[1:])

    Returns:
        int: Exit code (0 ok, 1 usage, 2 data, 3 solver)
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return int(e.code or 0)

    try:
        if args.command == "synth":
            if not args.config:
                parser.print_usage(sys.stderr)
                print("main.py synth: error: the following arguments are required: --config", file=sys.stderr)
                return EXIT_USAGE
            config = Config().apply_args(args)
            config.validate()
            if config.debug:
                os.environ["DEBUG"] = "true"
        else:
            config = parse_config(args)
    except FileNotFoundError as e:
        print_error_box("CONFIGURATION FILE MISSING", str(e))
        return EXIT_DATA
    except ValueError as e:
        print(f"[!] Invalid configuration: {e}", file=sys.stderr)
        return EXIT_USAGE

    pipeline_stats.reset()
    try:
        return COMMANDS[args.command](args, config)
    except FileNotFoundError as e:
        print_error_box("INPUT FILE NOT FOUND", str(e), (
            "Check the path and the working directory",
            "Run 'build' before 'transfer', 'route' or 'eval'",
        ))
        return EXIT_DATA
    except (DataFormatError, ModelFormatError) as e:
        print_error_box("MALFORMED INPUT", str(e), (
            "Check the file against the documented column layout",
            "Regenerate the model with 'build' if it was written by another version",
        ))
        return EXIT_DATA
    except TrainingLeakError as e:
        print_error_box("TRAINING FINGERPRINT MISMATCH", str(e), (
            "Build the model with the same --boundary used for eval",
            "Use the same trajectory file and time window for build and eval",
        ))
        return EXIT_DATA
    except KeyError as e:
        print_error_box("UNKNOWN VERTEX", str(e).strip("'\""))
        return EXIT_DATA
    except (NoPathError, NoRouteError, StitchError) as e:
        print_error_box("NO PATH", str(e))
        return EXIT_DATA
    except SyntheticGenerationError as e:
        print_error_box("SYNTHETIC GENERATION FAILED", str(e), (
            "Lower min_hops or trajectory_count",
            "Disable oneway_major or raise max_retries",
        ))
        return EXIT_DATA
    except TransferSolverError as e:
        residual = f" (relative residual {e.residual:.3e})" if e.residual is not None else ""
        print_error_box("TRANSFER SOLVER DID NOT CONVERGE", f"{e}{residual}", (
            "Raise mu2 to strengthen the diagonal",
            "Raise solver_maxiter in the config file",
        ))
        return EXIT_SOLVER
    except ValueError as e:
        print_error_box("INVALID DATA", str(e))
        return EXIT_DATA


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
