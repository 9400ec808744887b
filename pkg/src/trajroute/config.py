# -*- coding: utf-8 -*-
"""
Configuration management for the routing pipeline.

Settings come from three sources, later ones winning:
1. Built-in defaults
2. A key=value config file (--config), read with python-dotenv
3. Command-line flags
"""

import os

from dotenv import dotenv_values

from .evaluation import parse_distance_bands
from .ingest import SyntheticConfig, TimeWindow
from .netmodel import CostKind, FuelModel, RoadType
from .parallel import ParallelRunner
from .preference import FeatureSpace, PreferenceVector, RoadCondition

_TRUE_VALUES = {"true", "1", "yes"}

# attribute -> converter; the config file key is the upper-case attribute name
_FIELDS = {
    "amr": float,
    "mu1": float,
    "mu2": float,
    "top_k": int,
    "solver_tol": float,
    "solver_maxiter": int,
    "null_epsilon": float,
    "center_cap": int,
    "fuel_a": float,
    "fuel_b": float,
    "fuel_c": float,
    "threads": int,
    "distance_bands_km": str,
    "road_conditions": str,
    "time_window": str,
    "debug": lambda v: str(v).strip().lower() in _TRUE_VALUES,
}


class Config:
    """Tunable parameters shared by all subcommands"""

    def __init__(self, **overrides):
        """
        Initialize configuration with defaults, then apply overrides.

        Defaults:
            amr (0.7) - Similarity threshold for the transfer adjacency matrix, in [0, 2]
            mu1 (1.0) - Smoothness weight of the transfer objective
            mu2 (0.01) - Norm weight of the transfer objective (> 0 keeps the system regular)
            top_k (2) - Road types kept per region for region-edge features
            solver_tol (1e-10) - Conjugate gradient relative tolerance
            solver_maxiter (1000) - Conjugate gradient iteration cap per column
            null_epsilon (1e-9) - Rows of the transfer result below this are null
            center_cap (64) - Maximum transfer-center pairs per B-edge
            fuel_a, fuel_b, fuel_c (0.17, 2.1, 0.000012) - Fuel model constants
            threads (min(4, cpu_count)) - Worker threads per parallel stage
            distance_bands_km ("0,2,5,10,35") - Evaluation distance bands
            road_conditions ("") - Slave features, comma list, '+' joins a pair;
                                   empty means the six road types
            time_window ("") - Departure time-of-day filter, HH:MM-HH:MM
            debug (False) - Verbose output
        """
        self.amr = 0.7
        self.mu1 = 1.0
        self.mu2 = 0.01
        self.top_k = 2
        self.solver_tol = 1e-10
        self.solver_maxiter = 1000
        self.null_epsilon = 1e-9
        self.center_cap = 64
        self.fuel_a = 0.17
        self.fuel_b = 2.1
        self.fuel_c = 0.000012
        self.threads = min(4, os.cpu_count() or 4)
        self.distance_bands_km = "0,2,5,10,35"
        self.road_conditions = ""
        self.time_window = ""
        self.debug = False

        for name, value in overrides.items():
            if name not in _FIELDS:
                raise ValueError(f"unknown configuration key '{name}'")
            setattr(self, name, _FIELDS[name](value))

    def apply_file(self, path):
        """
        Apply KEY=value settings from a config file.

        Raises:
            FileNotFoundError: If the file does not exist
            ValueError: On an unknown key or a value that does not convert
        """
        if not os.path.isfile(path):
            raise FileNotFoundError(f"config file not found: {path}")
        for key, value in dotenv_values(path).items():
            name = key.strip().lower()
            if name not in _FIELDS:
                raise ValueError(f"unknown configuration key '{key}' in {path}")
            if value is None or value == "":
                continue
            try:
                setattr(self, name, _FIELDS[name](value))
            except ValueError:
                raise ValueError(f"invalid value '{value}' for {key} in {path}") from None
        return self

    def apply_args(self, args):
        """Apply every argparse attribute that names a field and is not None."""
        for name in _FIELDS:
            value = getattr(args, name, None)
            if value is not None:
                setattr(self, name, _FIELDS[name](value))
        return self

    def validate(self):
        """
        Validate configuration values.

        Raises:
            ValueError: If configuration is invalid
        """
        if not 0.0 <= self.amr <= 2.0:
            raise ValueError("amr must be in [0, 2]")
        if self.mu1 < 0:
            raise ValueError("mu1 must be non-negative")
        if self.mu2 < 0:
            raise ValueError("mu2 must be non-negative")
        if self.top_k < 1:
            raise ValueError("top_k must be at least 1")
        if self.solver_tol <= 0:
            raise ValueError("solver_tol must be positive")
        if self.solver_maxiter < 1:
            raise ValueError("solver_maxiter must be at least 1")
        if self.null_epsilon <= 0:
            raise ValueError("null_epsilon must be positive")
        if self.center_cap < 1:
            raise ValueError("center_cap must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        if min(self.fuel_a, self.fuel_b, self.fuel_c) < 0:
            raise ValueError("fuel constants must be non-negative")
        parse_distance_bands(self.distance_bands_km)
        self.feature_space()
        if self.time_window:
            TimeWindow.parse(self.time_window)

    def feature_space(self):
        return FeatureSpace.from_text(self.road_conditions)

    def fuel_model(self):
        return FuelModel(self.fuel_a, self.fuel_b, self.fuel_c)

    def distance_bands(self):
        return parse_distance_bands(self.distance_bands_km)

    def window(self):
        return TimeWindow.parse(self.time_window) if self.time_window else None

    def runner(self, label="Worker"):
        return ParallelRunner(max_workers=self.threads, label=label)

    def to_dict(self):
        return {name: getattr(self, name) for name in _FIELDS}


def parse_config(args=None, config_file=None):
    """
    Build the configuration from defaults, an optional config file and flags.

    Args:
        args (argparse.Namespace): Parsed flags; attributes named like
                                   Config fields override the file
        config_file (str): Optional key=value file (default: args.config)

    Returns:
        Config: Validated configuration

    Raises:
        ValueError: If configuration is invalid
        FileNotFoundError: If the config file does not exist
    """
    config = Config()
    config_file = config_file or getattr(args, "config", None)
    if config_file:
        config.apply_file(config_file)
    if args is not None:
        config.apply_args(args)
    config.validate()
    if config.debug:
        os.environ["DEBUG"] = "true"
    return config


# ----------------------------------------------------------------------------
# Synthetic world configuration
# ----------------------------------------------------------------------------

def parse_preference(text):
    """
    Parse "TT" or "TT/motorway" (a '+'-joined slave is allowed) into a PreferenceVector.

    Raises:
        ValueError: On an unknown cost feature or road type
    """
    master, _, slave = str(text).strip().partition("/")
    return PreferenceVector(CostKind(master.strip().upper()),
                            RoadCondition.parse(slave) if slave.strip() else None)


def _parse_block(text):
    r, _, c = text.strip().partition(".")
    return (int(r), int(c))


def _parse_planted(text):
    """
    Parse "0.0-1.1:TT/motorway; 1.1-0.0:DI" into {((0,0),(1,1)): vector, ...}.

    Blocks are written row.col.
    """
    planted = {}
    for item in str(text).split(";"):
        if not item.strip():
            continue
        pair, _, preference = item.partition(":")
        origin, _, destination = pair.partition("-")
        planted[(_parse_block(origin), _parse_block(destination))] = parse_preference(preference)
    return planted


def _parse_types(text):
    return [RoadType.from_name(t) for t in str(text).split(",") if t.strip()]


_SYNTH_LISTS = ("row_types", "col_types", "planted_preferences", "preference_pool")

_SYNTH_FIELDS = {
    "grid_rows": int,
    "grid_cols": int,
    "trajectory_count": int,
    "rng_seed": int,
    "detour_noise": float,
    "block_size": int,
    "spacing_m": float,
    "length_jitter": float,
    "oneway_major": lambda v: str(v).strip().lower() in _TRUE_VALUES,
    "restrict_to_planted": lambda v: str(v).strip().lower() in _TRUE_VALUES,
    "origin_lon": float,
    "origin_lat": float,
    "departure_start": int,
    "departure_span_s": int,
    "driver_count": int,
    "min_hops": int,
    "max_retries": int,
}


def load_synthetic_config(path):
    """
    Build a SyntheticConfig from a key=value file.

    Besides the plain SyntheticConfig fields (upper case), the file accepts
    ROW_TYPES / COL_TYPES (comma lists of road type names),
    PLANTED_PREFERENCES ("0.0-1.1:TT/motorway; ...") and PREFERENCE_POOL
    ("TT/motorway,DI").

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: On an unknown key or an invalid value
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"synthetic config not found: {path}")

    kwargs = {}
    plan = {}
    for key, value in dotenv_values(path).items():
        name = key.strip().lower()
        if name not in _SYNTH_FIELDS and name not in _SYNTH_LISTS:
            raise ValueError(f"unknown synthetic configuration key '{key}' in {path}")
        if value is None or value == "":
            continue
        try:
            if name in _SYNTH_FIELDS:
                kwargs[name] = _SYNTH_FIELDS[name](value)
            elif name == "row_types":
                plan["rows"] = _parse_types(value)
            elif name == "col_types":
                plan["cols"] = _parse_types(value)
            elif name == "planted_preferences":
                kwargs["planted_preferences"] = _parse_planted(value)
            else:
                kwargs["preference_pool"] = tuple(parse_preference(p) for p in value.split(",") if p.strip())
        except ValueError as e:
            raise ValueError(f"invalid value '{value}' for {key} in {path}: {e}") from None

    if plan:
        kwargs["road_type_plan"] = plan
    cfg = SyntheticConfig(**kwargs)
    cfg.validate()
    return cfg
