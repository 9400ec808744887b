# -*- coding: utf-8 -*-
"""
File handling operations for the routing pipeline.

This module provides xxHash128 digests of the input files (recorded in the
model artifact) and of training trajectory sets (leak check at evaluation).
"""

import xxhash
from .utils import is_debug_enabled

HASH_BLOCK_BYTES = 1 << 20


def calculate_file_hash(file_path):
    """
    xxHash128 of a file's bytes, read in fixed blocks.

    Args:
        file_path (str): Path to the file to hash

    Returns:
        str: Hexadecimal digest (32 characters), or None if the file
             cannot be read
    """
    hasher = xxhash.xxh128()
    try:
        with open(file_path, "rb") as f:
            for block in iter(lambda: f.read(HASH_BLOCK_BYTES), b""):
                hasher.update(block)
    except OSError as e:
        if is_debug_enabled():
            print(f"[DEBUG] Could not hash {file_path}: {e}")
        return None
    return hasher.hexdigest()


def hash_input_files(paths):
    """
    Digest every named input file.

    Args:
        paths (dict): Role name ("nodes", "edges", "trajectories") to file path

    Returns:
        dict: Role name to hex digest (None for unreadable files)
    """
    return {role: calculate_file_hash(path) for role, path in sorted(paths.items())}


def changed_inputs(recorded, paths):
    """
    Roles whose current file digest differs from the recorded one.

    Roles missing from recorded are skipped, so artifacts written without
    input digests never report a change.

    Returns:
        list[str]: Sorted role names that changed
    """
    changed = []
    for role, path in sorted(paths.items()):
        expected = recorded.get(role)
        if expected is not None and calculate_file_hash(path) != expected:
            changed.append(role)
    return changed


def fingerprint_trajectories(trajectories):
    """
    Fingerprint a trajectory set for train/test leak detection.

    The hash covers (traj_id, driver_id, departure, vertex ids) of every
    trajectory, sorted by traj_id, so load order does not matter.

    Args:
        trajectories (iterable[Trajectory]): Training trajectories

    Returns:
        str: Hexadecimal xxHash128 of the canonical records
    """
    hasher = xxhash.xxh128()
    for traj in sorted(trajectories, key=lambda t: (t.traj_id, t.departure)):
        vertices = ",".join(str(v) for v in traj.path.vertices)
        hasher.update(f"{traj.traj_id}|{traj.driver_id}|{traj.departure}|{vertices}\n".encode("utf-8"))
    return hasher.hexdigest()
