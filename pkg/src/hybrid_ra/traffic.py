"""Per-slot device activations.

URLLC arrivals are i.i.d. Poisson per slot, drawn by inversion of the Poisson
CDF from one uniform per slot so that seeds reproduce independently of the
numpy sampler version. mMTC activity is a fixed number of devices per slot.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .exceptions import InvalidInputError
from .geometry import DevicePlacement, GeometryConfig, sample_distance


@dataclass(frozen=True)
class UrllcSeries:
    counts: np.ndarray
    mean_rate: float

    def __len__(self):
        return len(self.counts)


@dataclass(frozen=True)
class MmtcPopulation:
    devices: tuple

    @property
    def count(self):
        return len(self.devices)

    @property
    def ta_indexes(self):
        return np.fromiter((d.ta_index for d in self.devices), dtype=np.int64, count=self.count)


def poisson_counts(lam, size, rng):
    """Poisson(lam) draws by CDF inversion, one uniform each."""
    if not lam >= 0:
        raise InvalidInputError(f"lambda must be >= 0, got {lam!r}")
    u = rng.random(size)
    if lam == 0:
        return np.zeros(np.shape(u), dtype=np.int64)
    # ppf(0) is -1 for scipy; u is in [0, 1) so clamp the single bad point
    return np.maximum(stats.poisson.ppf(u, lam), 0).astype(np.int64)


def poisson_series(lam, horizon, rng):
    if horizon < 1:
        raise InvalidInputError(f"horizon must be >= 1, got {horizon!r}")
    return UrllcSeries(counts=poisson_counts(lam, int(horizon), rng), mean_rate=float(lam))


def activate_mmtc(count, geometry: GeometryConfig, rng):
    """Place ``count`` active mMTC devices uniformly over the cell."""
    if count < 0:
        raise InvalidInputError(f"count must be >= 0, got {count!r}")
    devices = []
    for device_id in range(count):
        d = float(sample_distance(geometry.cell_radius_m, rng))
        devices.append(DevicePlacement(device_id, d, geometry.ta_index(d)))
    return MmtcPopulation(tuple(devices))


def write_series_csv(series, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot", "count"])
        for slot, count in enumerate(series.counts):
            writer.writerow([slot, int(count)])


def read_series_csv(path, mean_rate=float("nan")):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["slot", "count"]:
            raise InvalidInputError(f"{path}: expected header slot,count, got {reader.fieldnames}")
        rows = [(int(r["slot"]), int(r["count"])) for r in reader]
    rows.sort()
    if [s for s, _ in rows] != list(range(len(rows))):
        raise InvalidInputError(f"{path}: slots must be 0..n-1 without gaps")
    return UrllcSeries(np.array([c for _, c in rows], dtype=np.int64), mean_rate)
