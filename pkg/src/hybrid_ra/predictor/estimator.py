"""scikit-learn style regressors around the recurrent count predictor."""
from __future__ import annotations

import logging

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ..exceptions import InvalidConfigError, InvalidInputError
from .network import forward_batch, init_model, rmse_and_grads, rmse_loss

logger = logging.getLogger(__name__)

OPTIMIZERS = ("sgd", "adam")


def round_counts(y):
    """Vectorized round-half-away-from-zero clamped at zero."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("predictions must be finite")
    return np.maximum(np.copysign(np.floor(np.abs(y) + 0.5), y), 0).astype(np.int64)


class _Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m, self.v, self.t = {}, {}, 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1 - self.beta1**self.t
        c2 = 1 - self.beta2**self.t
        for k, p in params.items():
            g = grads[k]
            m = self.m.setdefault(k, np.zeros_like(p))
            v = self.v.setdefault(k, np.zeros_like(p))
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class _SGD:
    def __init__(self, lr):
        self.lr = lr

    def step(self, params, grads):
        for k, p in params.items():
            p -= self.lr * grads[k]


class _RecurrentCountRegressor(RegressorMixin, BaseEstimator):
    _attention = True

    def __init__(self, hidden_size=32, learning_rate=1e-3, epochs=200, batch_size=32,
                 validation_fraction=0.2, patience=10, clip_norm=5.0, optimizer="sgd",
                 scale=None, horizon=1, random_state=None):
        self.hidden_size = hidden_size
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.validation_fraction = validation_fraction
        self.patience = patience
        self.clip_norm = clip_norm
        self.optimizer = optimizer
        self.scale = scale
        self.horizon = horizon
        self.random_state = random_state

    def _validate_params(self):
        if self.optimizer not in OPTIMIZERS:
            raise InvalidConfigError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}", "optimizer")
        if self.hidden_size < 1 or self.batch_size < 1 or self.epochs < 0:
            raise InvalidConfigError("hidden_size and batch_size must be >= 1, epochs >= 0")
        if not 0 <= self.validation_fraction < 1:
            raise InvalidConfigError("validation_fraction must be in [0, 1)", "validation_fraction")
        if self.learning_rate < 0:
            raise InvalidConfigError("learning_rate must be >= 0", "learning_rate")

    def fit(self, X, y):
        """Train by mini-batch gradient descent on the RMSE with early stopping.

        Parameters
        ----------
        X : array-like of shape (n_samples, window)
            Windows of past counts, oldest first.
        y : array-like of shape (n_samples,)
            Targets in count units.

        Returns
        -------
        self
            The fitted regressor. ``model_`` holds the parameters from the
            epoch with the lowest validation RMSE and ``history_`` the
            ``(epoch, train_rmse, val_rmse)`` curve.
        """
        self._validate_params()
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        n, window = X.shape
        self.n_features_in_ = window

        scale = self.scale
        if scale is None:
            scale = 4.0 * float(X.mean())
        if not scale > 0:
            scale = 1.0
        rng = np.random.default_rng(self.random_state)
        model = init_model(window, self.hidden_size, self._attention, self.horizon, scale, rng)
        Xn, yn = X / scale, y / scale

        n_val = int(round(self.validation_fraction * n)) if n >= 2 else 0
        n_train = n - n_val
        if n_train < 1:
            raise InvalidInputError("not enough samples left for training after the validation split")
        Xt, yt = Xn[:n_train], yn[:n_train]
        Xv, yv = (Xn[n_train:], yn[n_train:]) if n_val else (Xt, yt)

        opt = _Adam(self.learning_rate) if self.optimizer == "adam" else _SGD(self.learning_rate)
        params = model.parameters()
        best_val = rmse_loss(forward_batch(model, Xv), yv)
        best = model.copy()
        self.best_epoch_ = 0
        history = []
        stale = 0
        for epoch in range(1, self.epochs + 1):
            order = rng.permutation(n_train)
            sq_sum = 0.0
            for start in range(0, n_train, self.batch_size):
                idx = order[start:start + self.batch_size]
                loss, grads = rmse_and_grads(model, Xt[idx], yt[idx])
                sq_sum += loss * loss * len(idx)
                if self.clip_norm:
                    norm = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
                    if norm > self.clip_norm:
                        for g in grads.values():
                            g *= self.clip_norm / norm
                opt.step(params, grads)
            train_rmse = np.sqrt(sq_sum / n_train) * scale
            val = rmse_loss(forward_batch(model, Xv), yv)
            history.append((epoch, float(train_rmse), val * scale))
            logger.debug("epoch %d train %.4f val %.4f", epoch, train_rmse, val * scale)
            if val < best_val:
                best_val, best, stale = val, model.copy(), 0
                self.best_epoch_ = epoch
            else:
                stale += 1
                if self.patience and stale >= self.patience:
                    break
        self.model_ = best
        self.history_ = history
        self.best_val_rmse_ = best_val * scale
        return self

    def predict(self, X):
        """Real-valued forecasts in count units, shape (n_samples,)."""
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise InvalidInputError(f"X has {X.shape[1]} features, expected window of {self.n_features_in_}")
        m = self.model_
        return forward_batch(m, X / m.scale) * m.scale

    def predict_counts(self, X):
        """Forecasts rounded to non-negative device counts."""
        return round_counts(self.predict(X))


class AttentionLSTMRegressor(_RecurrentCountRegressor):
    """Two LSTM layers joined by Bahdanau attention, with a scalar linear head.

    Parameters
    ----------
    hidden_size : int, default=32
        Units in each LSTM layer (and in the attention projection).
    learning_rate : float, default=1e-3
        Step size of the optimizer.
    epochs : int, default=200
        Upper bound on training epochs.
    batch_size : int, default=32
        Windows per gradient step.
    validation_fraction : float, default=0.2
        Trailing share of the training windows held out for early stopping.
    patience : int, default=10
        Epochs without validation improvement before stopping; 0 disables.
    clip_norm : float, default=5.0
        Global gradient-norm clip; 0 or None disables.
    optimizer : {"sgd", "adam"}, default="sgd"
    scale : float, default=None
        Counts are divided by this before entering the network. ``None`` uses
        four times the mean of the training windows.
    horizon : int, default=1
        Peak horizon the targets were built with; stored on the model.
    random_state : int or None
        Seeds initialization and batch shuffling.
    """

    _attention = True


class LSTMRegressor(_RecurrentCountRegressor):
    """Same network and training as :class:`AttentionLSTMRegressor` without attention.

    Layer 2 receives ``concat(h1[i], h1[i-1])`` instead of the attention
    context, keeping the parameter layout otherwise identical.
    """

    _attention = False
