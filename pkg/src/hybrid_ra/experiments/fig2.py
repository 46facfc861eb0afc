"""Forecaster comparison on Poisson URLLC arrivals.

For each seed a fresh series is split chronologically: the head trains both
regressors (each holds out its own tail for early stopping) and the last
``test_fraction`` of slots is scored. Scores are the RMSE against the peak
target and the coverage rate, the share of test slots whose rounded forecast
is at least the actual count in that slot.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..predictor import AttentionLSTMRegressor, LSTMRegressor, make_windows
from ..traffic import poisson_series

MODELS = {"attention": AttentionLSTMRegressor, "lstm": LSTMRegressor}


@dataclass(frozen=True)
class Fig2Row:
    seed: int
    model: str
    test_rmse: float
    coverage: float
    best_epoch: int


@dataclass
class Fig2Run:
    rows: list
    estimators: dict  # (seed, model) -> fitted regressor
    predictions: dict  # seed -> dict of arrays for plotting


def split_series(counts, window, test_fraction):
    split = int(round(len(counts) * (1 - test_fraction)))
    return counts[:split], counts[split - window:]


def run_fig2(spec):
    rows, estimators, predictions = [], {}, {}
    for seed in spec.seeds:
        series = poisson_series(spec.urllc_lambda, spec.slots, np.random.default_rng(seed))
        train, test = split_series(series.counts, spec.window, spec.test_fraction)
        X, y, _ = make_windows(train, spec.window, spec.horizon)
        Xt, yt, actual = make_windows(test, spec.window, spec.horizon)
        pred = {"actual": actual, "peak": yt.astype(np.int64)}
        for name, cls in MODELS.items():
            est = cls(hidden_size=spec.hidden_size, learning_rate=spec.learning_rate, epochs=spec.epochs,
                      batch_size=spec.batch_size, patience=spec.patience, optimizer=spec.optimizer,
                      scale=4.0 * spec.urllc_lambda or None, horizon=spec.horizon, random_state=seed)
            est.fit(X, y)
            p = est.predict(Xt)
            rmse = float(np.sqrt(np.mean((p - yt) ** 2)))
            coverage = float(np.mean(est.predict_counts(Xt) >= actual))
            rows.append(Fig2Row(seed, name, rmse, coverage, est.best_epoch_))
            estimators[seed, name] = est
            pred[name] = p
        predictions[seed] = pred
    return Fig2Run(rows, estimators, predictions)
