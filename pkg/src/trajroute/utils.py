# -*- coding: utf-8 -*-
"""
Shared utility functions for the routing pipeline.

This module provides debug switches and small helpers used across modules.
"""

import os
import math

# Mean Earth radius in meters, used by the equirectangular approximation
EARTH_RADIUS_M = 6371008.8


def is_debug_enabled():
    """
    Check if general debug mode is enabled via DEBUG environment variable.

    This controls per-stage detail such as merge decisions, rejected
    trajectory records, per-edge learning scores and routing case dispatch.
    Does not affect:
    - Stage banners
    - Final summary statistics
    - Error messages

    Returns:
        bool: True if general debug mode is enabled, False otherwise
    """
    return os.environ.get('DEBUG', 'false').lower() == 'true'


def is_debug_solver_enabled():
    """
    Check if solver debug mode is enabled via DEBUG_SOLVER environment variable.

    This is for per-column conjugate gradient progress in the transfer step.

    Returns:
        bool: True if solver debug mode is enabled, False otherwise
    """
    return os.environ.get('DEBUG_SOLVER', 'false').lower() == 'true'


def equirectangular_xy(lon, lat, lat0):
    """
    Project a coordinate onto a local plane in meters.

    Args:
        lon (float): Longitude in degrees
        lat (float): Latitude in degrees
        lat0 (float): Reference latitude of the projection in degrees

    Returns:
        tuple: (x, y) in meters
    """
    x = math.radians(lon) * math.cos(math.radians(lat0)) * EARTH_RADIUS_M
    y = math.radians(lat) * EARTH_RADIUS_M
    return x, y


def equirectangular_distance(lon1, lat1, lon2, lat2):
    """
    Distance in meters between two coordinates (equirectangular approximation).

    Accurate to well under a percent at city scale, which is all region
    centroids need.
    """
    mean_lat = math.radians((lat1 + lat2) / 2.0)
    dx = math.radians(lon2 - lon1) * math.cos(mean_lat)
    dy = math.radians(lat2 - lat1)
    return EARTH_RADIUS_M * math.hypot(dx, dy)


def format_ms(seconds):
    """Format a duration in seconds as milliseconds with three decimals."""
    return f"{seconds * 1000.0:.3f} ms"
