"""Supervised pairs for the URLLC load predictor."""
from __future__ import annotations

import numpy as np

from ..exceptions import InvalidInputError


def _counts(series):
    return np.asarray(getattr(series, "counts", series))


def peak_targets(series, horizon):
    """``target[t] = max(series[t : t + horizon])``; length ``len(series) - horizon + 1``."""
    x = _counts(series)
    if horizon < 1:
        raise InvalidInputError(f"horizon must be >= 1, got {horizon}")
    if x.ndim != 1 or len(x) < horizon:
        raise InvalidInputError(f"series of length {len(x)} is shorter than horizon {horizon}")
    return np.lib.stride_tricks.sliding_window_view(x, horizon).max(axis=1)


def make_windows(series, window, horizon):
    """Windows of ``window`` past counts and the peak over the next ``horizon`` slots.

    Row ``k`` covers input slots ``k .. k+window-1`` and predicts the peak over
    slots ``k+window .. k+window+horizon-1``. Also returns the count at the
    first predicted slot, which is what a peak forecast has to cover.
    """
    x = _counts(series)
    if window < 1:
        raise InvalidInputError(f"window must be >= 1, got {window}")
    n = len(x) - window - horizon + 1
    if n < 1:
        raise InvalidInputError(
            f"need at least {window + horizon} slots for window={window}, horizon={horizon}; got {len(x)}")
    X = np.lib.stride_tricks.sliding_window_view(x[: window + n - 1], window).astype(float)
    y = peak_targets(x[window:], horizon).astype(float)
    actual = x[window: window + n]
    return X, y, actual
