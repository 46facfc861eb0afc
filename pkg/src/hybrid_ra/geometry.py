"""Circular cell geometry and timing-advance (TA) annuli.

The cell of radius ``R`` is cut into concentric rings of width ``quantum_m``.
Every device inside one ring shares a TA index; indexes run from 1 at the
centre to ``annuli`` at the edge.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidConfigError, InvalidInputError

#: Width of the annulus quantum in meters (two TA steps).
DEFAULT_QUANTUM_M = 156.0

#: Preambles are placed inside a 26-subcarrier window, which caps the ring count.
SUBCARRIER_WINDOW = 26


def annulus_count(cell_radius_m, quantum_m=DEFAULT_QUANTUM_M):
    """Number of TA annuli, ``ceil(R / quantum)``."""
    if not cell_radius_m > 0:
        raise InvalidConfigError(f"cell_radius_m must be > 0, got {cell_radius_m!r}", "cell_radius_m")
    if not quantum_m > 0:
        raise InvalidConfigError(f"quantum_m must be > 0, got {quantum_m!r}", "quantum_m")
    count = math.ceil(cell_radius_m / quantum_m)
    if count > SUBCARRIER_WINDOW:
        raise InvalidConfigError(
            f"{count} annuli exceed the {SUBCARRIER_WINDOW}-subcarrier placement window",
            "cell_radius_m",
        )
    return count


def ta_index(distance_m, quantum_m, annuli):
    """TA index of a device at ``distance_m`` from the base station.

    A device exactly on a ring boundary belongs to the outer ring. Accepts a
    scalar (returns ``int``) or an array (returns an ``int64`` array).
    """
    d = np.asarray(distance_m, dtype=float)
    if np.any(d < 0) or np.any(np.isnan(d)):
        raise InvalidInputError("distance_m must be non-negative")
    if not quantum_m > 0:
        raise InvalidInputError(f"quantum_m must be > 0, got {quantum_m!r}")
    idx = np.clip(np.floor(d / quantum_m).astype(np.int64) + 1, 1, annuli)
    if idx.ndim == 0:
        return int(idx)
    return idx


def sample_distance(cell_radius_m, rng, size=None):
    """Radial distance of a point drawn uniformly over the disk area.

    Consumes one uniform per sample, ``R * sqrt(u)``.
    """
    if not cell_radius_m > 0:
        raise InvalidConfigError(f"cell_radius_m must be > 0, got {cell_radius_m!r}", "cell_radius_m")
    u = rng.random(size)
    return cell_radius_m * np.sqrt(u)


def annulus_probabilities(cell_radius_m, quantum_m, annuli):
    """Exact probability of each TA index under area-uniform placement."""
    i = np.arange(1, annuli + 1, dtype=float)
    outer = np.minimum(i * quantum_m, cell_radius_m)
    inner = (i - 1) * quantum_m
    return (outer**2 - inner**2) / cell_radius_m**2


@dataclass(frozen=True)
class GeometryConfig:
    cell_radius_m: float
    quantum_m: float = DEFAULT_QUANTUM_M
    annuli: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "annuli", annulus_count(self.cell_radius_m, self.quantum_m))

    def ta_index(self, distance_m):
        return ta_index(distance_m, self.quantum_m, self.annuli)


@dataclass(frozen=True)
class DevicePlacement:
    device_id: int
    distance_m: float
    ta_index: int
