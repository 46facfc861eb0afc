"""MSG1: preamble choice, annulus-dependent placement, and occupancy detection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidConfigError, InvalidInputError
from .geometry import SUBCARRIER_WINDOW


def subcarrier_start(annuli, ta_index):
    """Starting subcarrier of a preamble sent from ring ``ta_index``.

    The half-difference ``(26 - annuli) / 2`` is floored.
    """
    if annuli > SUBCARRIER_WINDOW:
        raise InvalidConfigError(f"annuli={annuli} exceeds the {SUBCARRIER_WINDOW}-subcarrier window", "annuli")
    if not 1 <= ta_index <= annuli:
        raise InvalidInputError(f"ta_index must be in 1..{annuli}, got {ta_index}")
    return (SUBCARRIER_WINDOW - annuli) // 2 + ta_index


@dataclass(frozen=True)
class PreambleAssignment:
    device_id: int
    preamble: int
    ta_index: int
    subcarrier_start: int


def preamble_from_uniform(u, num_preambles):
    """Map uniforms in [0, 1) onto preambles 1..num_preambles."""
    return np.minimum(np.floor(np.asarray(u) * num_preambles).astype(np.int64), num_preambles - 1) + 1


def select_preambles(population, num_preambles, rng, annuli=None):
    """Every device picks a preamble uniformly; consumes one uniform per device.

    ``annuli`` defaults to the largest TA index present, which is enough for
    the placement formula but callers holding a geometry should pass it.
    """
    if num_preambles < 1:
        raise InvalidConfigError(f"num_preambles must be >= 1, got {num_preambles}", "num_preambles")
    devices = population.devices
    if annuli is None:
        annuli = max((d.ta_index for d in devices), default=1)
    out = []
    for dev in devices:
        r = int(preamble_from_uniform(rng.random(), num_preambles))
        out.append(PreambleAssignment(dev.device_id, r, dev.ta_index, subcarrier_start(annuli, dev.ta_index)))
    return out


@dataclass
class OccupancyMatrix:
    """``counts[r-1, i-1]`` is the number of devices on preamble r in ring i."""

    counts: np.ndarray

    @property
    def num_preambles(self):
        return self.counts.shape[0]

    @property
    def annuli(self):
        return self.counts.shape[1]

    def n(self, preamble, ta_index):
        return int(self.counts[preamble - 1, ta_index - 1])

    @property
    def total(self):
        return int(self.counts.sum())


def detect_occupancy(assignments, num_preambles, annuli, miss_probability=0.0, rng=None):
    """Base-station estimate of n(r, i).

    Detection is exact by default. With ``miss_probability > 0`` each occupied
    (r, i) cell is independently dropped (reported as 0), which needs ``rng``.
    """
    counts = np.zeros((num_preambles, annuli), dtype=np.int64)
    for a in assignments:
        if not (1 <= a.preamble <= num_preambles and 1 <= a.ta_index <= annuli):
            raise InvalidInputError(f"assignment out of range: {a}")
        counts[a.preamble - 1, a.ta_index - 1] += 1
    if miss_probability > 0:
        if rng is None:
            raise InvalidInputError("rng is required when miss_probability > 0")
        occupied = np.flatnonzero(counts)
        missed = occupied[rng.random(occupied.size) < miss_probability]
        counts.flat[missed] = 0
    return OccupancyMatrix(counts)
