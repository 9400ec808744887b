# -*- coding: utf-8 -*-
"""
Model artifact I/O.

A model is one self-describing JSON file tagged "l2r-model/1". It embeds
the road network (dense ids plus the original ids from the input files),
the regions, the region graph with its paths and preferences, the
feature space and the fingerprint of the training trajectories. Keys are
sorted and no timestamps are written, so the same inputs give the same
bytes.
"""

import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .clustering import Region, region_size_stats, size_histogram
from .netmodel import CostKind, Edge, FuelModel, Path, RoadNetwork, RoadType, Vertex
from .preference import FeatureSpace, PreferenceVector, RoadCondition
from .region_graph import PathRecord, RegionGraphModel
from .transfer import RegionEdgeFeatures

FORMAT_TAG = "l2r-model/1"
STAGE_BUILT = "built"
STAGE_TRANSFERRED = "transferred"


class ModelFormatError(ValueError):
    """Model file is not a readable l2r-model/1 artifact."""

    def __init__(self, message, path=None):
        self.path = path
        super().__init__(f"{message} in {path}" if path else message)


@dataclass
class ModelArtifact:
    net: RoadNetwork
    model: RegionGraphModel
    fingerprint: str
    stage: str = STAGE_BUILT
    feature_space: FeatureSpace = field(default_factory=FeatureSpace)
    time_window: Optional[str] = None
    boundary: Optional[int] = None
    params: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)

    @property
    def regions(self):
        return self.model.regions


def _network_to_dict(net):
    return {
        "fuel_model": {"a": net.fuel_model.a, "b": net.fuel_model.b, "c": net.fuel_model.c},
        "vertices": [[net.vertex_origin[v.id], v.lon, v.lat] for v in net.vertices],
        "edges": [[net.edge_origin[e.id], e.source, e.target, e.length, e.speed_limit, int(e.road_type)]
                  for e in net.edges],
    }


def _network_from_dict(data):
    fuel = FuelModel(**data["fuel_model"])
    vertices, vertex_origin = [], []
    for i, (original, lon, lat) in enumerate(data["vertices"]):
        vertices.append(Vertex(i, float(lon), float(lat)))
        vertex_origin.append(original)
    edges, edge_origin = [], []
    for i, (original, u, v, length, speed, road_type) in enumerate(data["edges"]):
        edges.append(Edge(i, int(u), int(v), float(length), float(speed), RoadType(road_type)))
        edge_origin.append(original)
    return RoadNetwork(vertices, edges, fuel_model=fuel, vertex_origin=vertex_origin, edge_origin=edge_origin)


def _record_to_dict(record):
    return {
        "vertices": list(record.path.vertices),
        "edges": list(record.path.edges),
        "count": record.count,
        "synthetic": record.synthetic,
    }


def _record_from_dict(data):
    path = Path(tuple(data["vertices"]), tuple(data["edges"]))
    return PathRecord(path, int(data["count"]), bool(data.get("synthetic", False)))


def _region_to_dict(region):
    return {
        "region_id": region.region_id,
        "members": list(region.members),
        "road_type": int(region.road_type) if region.road_type is not None else None,
        "centroid": list(region.centroid),
    }


def _region_from_dict(data):
    road_type = RoadType(data["road_type"]) if data["road_type"] is not None else None
    return Region(int(data["region_id"]), tuple(data["members"]), road_type, tuple(data["centroid"]))


def _graph_to_dict(model):
    return {
        "edges": [
            {
                "edge_id": e.edge_id,
                "from": e.from_region,
                "to": e.to_region,
                "kind": e.kind,
                "dead": e.dead,
                "preference": e.preference.to_dict() if e.preference is not None else None,
                "preference_source": e.preference_source,
                "features": e.features.to_dict() if e.features is not None else None,
                "paths": [_record_to_dict(r) for r in e.paths],
            }
            for e in model.edges
        ],
        "transfer_centers": {str(r): sorted([v, c] for v, c in centers.items())
                             for r, centers in model.transfer_centers.items()},
        "inner_paths": {str(r): [_record_to_dict(rec) for rec in records]
                        for r, records in model.inner_paths.items()},
    }


def _graph_from_dict(regions, data):
    model = RegionGraphModel(regions)
    for item in sorted(data["edges"], key=lambda e: e["edge_id"]):
        edge = model.add_edge(int(item["from"]), int(item["to"]), item["kind"])
        edge.dead = bool(item["dead"])
        if item["preference"] is not None:
            edge.preference = PreferenceVector.from_dict(item["preference"])
        edge.preference_source = item["preference_source"]
        if item["features"] is not None:
            edge.features = RegionEdgeFeatures.from_dict(item["features"])
        edge.paths = [_record_from_dict(r) for r in item["paths"]]
    for region_id, centers in data["transfer_centers"].items():
        model.transfer_centers[int(region_id)] = {int(v): int(c) for v, c in centers}
    for region_id, records in data["inner_paths"].items():
        model.inner_paths[int(region_id)] = [_record_from_dict(r) for r in records]
    return model


def _feature_space_to_dict(feature_space):
    return {
        "cost_features": [k.value for k in feature_space.cost_features],
        "road_conditions": [c.label for c in feature_space.road_conditions],
    }


def _feature_space_from_dict(data):
    return FeatureSpace(
        tuple(CostKind(k) for k in data["cost_features"]),
        tuple(RoadCondition.parse(c) for c in data["road_conditions"]),
    )


def save_model(artifact, path):
    """
    Write a model artifact as JSON.

    Args:
        artifact (ModelArtifact): Model and metadata
        path (str): Output file
    """
    document = {
        "format": FORMAT_TAG,
        "stage": artifact.stage,
        "fingerprint": artifact.fingerprint,
        "time_window": artifact.time_window,
        "boundary": artifact.boundary,
        "params": artifact.params,
        "inputs": artifact.inputs,
        "feature_space": _feature_space_to_dict(artifact.feature_space),
        "network": _network_to_dict(artifact.net),
        "regions": [_region_to_dict(r) for r in artifact.model.regions],
        "region_graph": _graph_to_dict(artifact.model),
    }
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(document, f, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        f.write("\n")


def load_model(path):
    """
    Read a model artifact.

    Raises:
        FileNotFoundError: If the file does not exist
        ModelFormatError: If the file is not JSON, has another format tag,
                          or misses a section
    """
    with open(path, "r", encoding="utf-8") as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise ModelFormatError(f"invalid JSON ({e.msg} at line {e.lineno})", path) from None

    if not isinstance(document, dict) or document.get("format") != FORMAT_TAG:
        found = document.get("format") if isinstance(document, dict) else None
        raise ModelFormatError(f"expected format '{FORMAT_TAG}', found '{found}'", path)

    try:
        net = _network_from_dict(document["network"])
        regions = [_region_from_dict(r) for r in document["regions"]]
        model = _graph_from_dict(regions, document["region_graph"])
        feature_space = _feature_space_from_dict(document["feature_space"])
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFormatError(f"damaged model ({type(e).__name__}: {e})", path) from None

    return ModelArtifact(
        net=net,
        model=model,
        fingerprint=document.get("fingerprint"),
        stage=document.get("stage", STAGE_BUILT),
        feature_space=feature_space,
        time_window=document.get("time_window"),
        boundary=document.get("boundary"),
        params=document.get("params") or {},
        inputs=document.get("inputs") or {},
    )


def _write_json(document, path):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(document, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")


def export_regions(regions, net, path, bands_km2=(2.0, 5.0, 10.0)):
    """Write regions.json: regions with original member ids, sizes and the area histogram."""
    sizes = region_size_stats(regions, net)
    entries = []
    for region, size in zip(regions, sizes):
        entry = region.to_dict(net)
        entry.update(area_km2=size["area_km2"], diameter_km=size["diameter_km"])
        entries.append(entry)
    _write_json({"regions": entries, "size_histogram": size_histogram(sizes, bands_km2)}, path)
    return sizes


def export_region_graph(model, net, path):
    """Write region_graph.json with original vertex ids."""
    def record(r):
        return {
            "path": [net.original_vertex_id(v) for v in r.path.vertices],
            "count": r.count,
            "synthetic": r.synthetic,
        }

    document = {
        "edges": [
            {
                "edge_id": e.edge_id,
                "from": e.from_region,
                "to": e.to_region,
                "kind": e.kind,
                "dead": e.dead,
                "paths": [record(r) for r in e.paths],
            }
            for e in model.edges
        ],
        "transfer_centers": {
            str(region_id): sorted([net.original_vertex_id(v), count] for v, count in centers.items())
            for region_id, centers in model.transfer_centers.items()
        },
        "inner_paths": {
            str(region_id): [record(r) for r in records]
            for region_id, records in model.inner_paths.items() if records
        },
    }
    _write_json(document, path)


def export_preferences(model, path):
    """Write preferences.json: one entry per region edge with its preference and where it came from."""
    document = [
        {
            "edge_id": e.edge_id,
            "from": e.from_region,
            "to": e.to_region,
            "kind": e.kind,
            "preference": e.preference.to_dict() if e.preference is not None else None,
            "source": e.preference_source,
        }
        for e in model.edges
    ]
    _write_json(document, path)
