"""Geolocate and count trees detected in nadir drone imagery."""

from ._treeloc import (
    TreelocError,
    cluster,
    error_stats,
    evaluate,
    geo_apply,
    geo_offset,
    geolocate,
    geolocate_pixel,
    inventory,
    simulate,
)

__all__ = [
    "TreelocError",
    "cluster",
    "error_stats",
    "evaluate",
    "geo_apply",
    "geo_offset",
    "geolocate",
    "geolocate_pixel",
    "inventory",
    "simulate",
]
