"""Attention-LSTM forecaster of the active URLLC device count."""
from .data import make_windows, peak_targets
from .estimator import AttentionLSTMRegressor, LSTMRegressor, round_counts
from .io import load_model, model_from_dict, model_to_dict, save_model, write_history_csv
from .network import (
    AttentionParams,
    LstmParams,
    PredictorModel,
    bahdanau_attention,
    forward,
    gradient_check,
    init_model,
    lstm_cell,
    round_prediction,
    zero_model,
)


def train(series, learning_rate=1e-3, epochs=200, window=10, horizon=5, hidden_size=32, seed=0,
          attention=True, **kwargs):
    """Fit a predictor on ``series`` and return its :class:`PredictorModel`.

    Extra keyword arguments go to the regressor (batch_size, patience, ...).
    """
    X, y, _ = make_windows(series, window, horizon)
    cls = AttentionLSTMRegressor if attention else LSTMRegressor
    est = cls(hidden_size=hidden_size, learning_rate=learning_rate, epochs=epochs, horizon=horizon,
              random_state=seed, **kwargs)
    return est.fit(X, y).model_


__all__ = [
    "AttentionLSTMRegressor",
    "AttentionParams",
    "LSTMRegressor",
    "LstmParams",
    "PredictorModel",
    "bahdanau_attention",
    "forward",
    "gradient_check",
    "init_model",
    "load_model",
    "lstm_cell",
    "make_windows",
    "model_from_dict",
    "model_to_dict",
    "peak_targets",
    "round_counts",
    "round_prediction",
    "save_model",
    "train",
    "write_history_csv",
    "zero_model",
]
