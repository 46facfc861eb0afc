"""Seeded Monte-Carlo sweeps.

Every trial owns a Philox stream keyed by a hash of (base seed, grid point)
with the trial index in the top counter word, so any single trial can be
re-run in isolation. The grid key leaves out the scheme: IHRA, IHRA-random
and TARA at the same point see common random numbers, which tightens their
comparison without biasing any one of them.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..access import ihra_mmtc_counts, tara_success_mask, urllc_round
from ..geometry import GeometryConfig
from ..predictor import AttentionLSTMRegressor, make_windows
from ..traffic import poisson_series

logger = logging.getLogger(__name__)

_URLLC_STREAM = 0x5552_4C4C  # spawn key of the URLLC series stream


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    R: float
    num_preambles: int
    Na: int
    trials: int
    mean_success: float
    ci95: float
    mean_urllc_success: float


def point_key(seed, R, quantum_m, num_preambles, Na, L):
    ss = np.random.SeedSequence(
        seed, spawn_key=(int(round(R * 1000)), int(round(quantum_m * 1000)), num_preambles, Na, L))
    lo, hi = ss.generate_state(2, np.uint64)
    return int(lo) | (int(hi) << 64)


def trial_rng(key, trial):
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, trial]))


class TrialStreams:
    """Reusable generator positioned on demand at the start of a trial's stream.

    ``streams.rng(t)`` yields the same draws as ``trial_rng(key, t)`` but only
    rewinds the counter instead of building a new bit generator, which is
    several times cheaper in a tight trial loop.
    """

    def __init__(self, key):
        self._bitgen = np.random.Philox(key=key)
        self._generator = np.random.Generator(self._bitgen)
        self._state = self._bitgen.state
        self._key = self._state["state"]["key"].copy()

    def rng(self, trial):
        state = dict(self._state)
        state["state"] = {"counter": np.array([0, 0, 0, trial], dtype=np.uint64), "key": self._key}
        state["buffer_pos"] = 4  # empty output buffer
        state["has_uint32"] = 0
        self._bitgen.state = state
        return self._generator


def mean_ci95(values):
    """Sample mean and t-based 95% confidence half-width (0 for one sample)."""
    values = np.asarray(values, dtype=float)
    n = len(values)
    mean = float(values.mean())
    if n < 2:
        return mean, 0.0
    sem = float(values.std(ddof=1)) / np.sqrt(n)
    return mean, float(stats.t.ppf(0.975, n - 1) * sem)


@dataclass
class UrllcPlan:
    """Per-trial URLLC (actual, predicted) counts shared by every grid point."""

    actual: np.ndarray
    predicted: np.ndarray

    @classmethod
    def fixed(cls, count, trials):
        a = np.full(trials, count, dtype=np.int64)
        return cls(a, a.copy())

    @classmethod
    def poisson(cls, spec):
        """Train a forecaster on one series, then forecast a fresh series slot by slot."""
        rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(_URLLC_STREAM,)))
        q, h = spec.predictor_window, spec.predictor_horizon
        train = poisson_series(spec.urllc_lambda, spec.predictor_train_slots, rng)
        X, y, _ = make_windows(train, q, h)
        est = AttentionLSTMRegressor(hidden_size=spec.predictor_hidden, epochs=spec.predictor_epochs,
                                     horizon=h, random_state=spec.seed)
        est.fit(X, y)
        evaluation = poisson_series(spec.urllc_lambda, q + spec.trials + h - 1, rng)
        Xe, _, actual = make_windows(evaluation, q, h)
        logger.info("URLLC forecaster trained for %d epochs", len(est.history_))
        return cls(actual[: spec.trials].astype(np.int64), est.predict_counts(Xe)[: spec.trials])

    @classmethod
    def for_spec(cls, spec):
        if spec.urllc_mode == "poisson":
            return cls.poisson(spec)
        return cls.fixed(spec.urllc_count, spec.trials)


def run_point(scheme, geometry, num_preambles, Na, L, trials, key, urllc, unmatched_top_level=False):
    """Per-trial (total successes, URLLC successes) at one grid point."""
    total = np.empty(trials, dtype=np.int64)
    urllc_ok = np.empty(trials, dtype=np.int64)
    streams = TrialStreams(key)
    for t in range(trials):
        rng = streams.rng(t)
        actual = int(urllc.actual[t])
        if scheme == "tara":
            ok = tara_success_mask(Na + actual, num_preambles, rng)
            u = int(ok[Na:].sum())
            total[t] = int(ok[:Na].sum()) + u
        else:
            success, _, _ = ihra_mmtc_counts(geometry, num_preambles, L, Na, scheme, rng, unmatched_top_level)
            u = urllc_round(int(urllc.predicted[t]), actual)
            total[t] = success + u
        urllc_ok[t] = u
    return total, urllc_ok


def run_experiment(spec):
    """Run every grid point of ``spec``; rows sorted by (scheme, R, num_preambles, Na)."""
    urllc = UrllcPlan.for_spec(spec)
    rows = []
    for R in spec.R:
        geometry = GeometryConfig(R, spec.quantum_m)
        for num_preambles in spec.num_preambles:
            for Na in spec.Na:
                key = point_key(spec.seed, R, spec.quantum_m, num_preambles, Na, spec.L)
                for scheme in spec.scheme:
                    total, u = run_point(scheme, geometry, num_preambles, Na, spec.L, spec.trials, key, urllc,
                                         spec.unmatched_top_level)
                    mean, ci = mean_ci95(total)
                    rows.append(ResultRow(scheme, R, num_preambles, Na, spec.trials, mean, ci, float(u.mean())))
                    logger.debug("%s R=%g tp=%d Na=%d -> %.3f", scheme, R, num_preambles, Na, mean)
    rows.sort(key=lambda r: (r.scheme, r.R, r.num_preambles, r.Na))
    return rows
