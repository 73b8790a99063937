"""Panoramic semantic occupancy core (C++), exposed through numpy arrays."""

from ._panocc import (
    IGNORE,
    CameraModel,
    PanoccError,
    argmax,
    build_remap,
    cartesian_centroids,
    cross_indices,
    fixture,
    fixture_camera,
    grad_energy3d,
    lift,
    losses,
    metrics,
    moe_uniform_fuse,
    read_ptns,
    unwrap,
    write_ptns,
)

__all__ = [
    "IGNORE",
    "CameraModel",
    "PanoccError",
    "argmax",
    "build_remap",
    "cartesian_centroids",
    "cross_indices",
    "fixture",
    "fixture_camera",
    "grad_energy3d",
    "lift",
    "losses",
    "metrics",
    "moe_uniform_fuse",
    "read_ptns",
    "unwrap",
    "write_ptns",
]
