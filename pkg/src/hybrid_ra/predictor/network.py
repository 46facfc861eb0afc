"""Two-layer LSTM with additive (Bahdanau) attention between the layers.

Layer 1 runs over the normalized count window and produces states
``h1[1..q]``. At step ``i`` the attention layer scores every layer-1 state
against the query ``h1[i-1]``::

    e[i, j] = V . tanh(W_u h1[j] + W_h h1[i-1])
    a[i, :] = softmax(e[i, :])
    z[i]    = sum_j a[i, j] h1[j]

and layer 2 consumes ``concat(z[i], h1[i-1])``. The last layer-2 state goes
through a scalar linear head. ``h1[0]`` is the zero vector.

The plain-LSTM baseline keeps the same wiring but feeds ``h1[i]`` in place of
``z[i]``, so the two models differ only by the attention layer.

All batched routines take windows of shape ``(batch, q)`` already divided by
the model scale.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidInputError

GATES = ("f", "u", "c", "o")


def sigmoid(x):
    # tanh form: no overflow and faster than expit on small arrays
    return 0.5 * np.tanh(0.5 * x) + 0.5


def _gate_scale(H):
    # sigmoid(x) = (tanh(x/2) + 1) / 2 for f, u, o; plain tanh for the candidate
    s = np.full(4 * H, 0.5)
    s[2 * H:3 * H] = 1.0
    return s


def softmax(e, axis=-1):
    e = e - e.max(axis=axis, keepdims=True)
    w = np.exp(e)
    return w / w.sum(axis=axis, keepdims=True)


@dataclass
class LstmParams:
    """Gate weights act on ``concat(h_prev, x)``; shapes are ``(H, H + I)``."""

    W_f: np.ndarray
    W_u: np.ndarray
    W_c: np.ndarray
    W_o: np.ndarray
    b_f: np.ndarray
    b_u: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray

    @property
    def hidden_size(self):
        return self.W_f.shape[0]

    @property
    def input_size(self):
        return self.W_f.shape[1] - self.W_f.shape[0]

    def stacked(self):
        W = np.concatenate([self.W_f, self.W_u, self.W_c, self.W_o], axis=0)
        b = np.concatenate([self.b_f, self.b_u, self.b_c, self.b_o])
        return W, b

    @classmethod
    def init(cls, input_size, hidden_size, rng):
        bound = 1.0 / np.sqrt(hidden_size + input_size)
        shape = (hidden_size, hidden_size + input_size)
        kw = {f"W_{g}": rng.uniform(-bound, bound, shape) for g in GATES}
        kw.update({f"b_{g}": rng.uniform(-bound, bound, hidden_size) for g in GATES})
        return cls(**kw)

    @classmethod
    def zeros(cls, input_size, hidden_size):
        shape = (hidden_size, hidden_size + input_size)
        kw = {f"W_{g}": np.zeros(shape) for g in GATES}
        kw.update({f"b_{g}": np.zeros(hidden_size) for g in GATES})
        return cls(**kw)


@dataclass
class AttentionParams:
    W_u: np.ndarray  # (A, H) applied to every layer-1 state
    W_h: np.ndarray  # (A, H) applied to the query state
    V: np.ndarray  # (A,)

    @classmethod
    def init(cls, hidden_size, attention_size, rng):
        b_in = 1.0 / np.sqrt(hidden_size)
        b_v = 1.0 / np.sqrt(attention_size)
        return cls(
            rng.uniform(-b_in, b_in, (attention_size, hidden_size)),
            rng.uniform(-b_in, b_in, (attention_size, hidden_size)),
            rng.uniform(-b_v, b_v, attention_size),
        )

    @classmethod
    def zeros(cls, hidden_size, attention_size):
        return cls(np.zeros((attention_size, hidden_size)), np.zeros((attention_size, hidden_size)),
                   np.zeros(attention_size))


@dataclass
class PredictorModel:
    lstm1: LstmParams
    lstm2: LstmParams
    attention: AttentionParams | None
    fc_w: np.ndarray
    fc_b: np.ndarray  # shape (1,)
    window: int
    horizon: int = 1
    scale: float = 1.0

    def __post_init__(self):
        if self.window < 1 or self.horizon < 1:
            raise InvalidInputError("window and horizon must be >= 1")
        if self.lstm2.input_size != 2 * self.lstm1.hidden_size:
            raise InvalidInputError("layer-2 input size must be twice the layer-1 hidden size")

    @property
    def uses_attention(self):
        return self.attention is not None

    def parameters(self):
        """Name -> array mapping; the arrays are the live parameters."""
        out = {}
        for layer in ("lstm1", "lstm2"):
            p = getattr(self, layer)
            for g in GATES:
                out[f"{layer}.W_{g}"] = getattr(p, f"W_{g}")
                out[f"{layer}.b_{g}"] = getattr(p, f"b_{g}")
        if self.attention is not None:
            out["attention.W_u"] = self.attention.W_u
            out["attention.W_h"] = self.attention.W_h
            out["attention.V"] = self.attention.V
        out["fc.w"] = self.fc_w
        out["fc.b"] = self.fc_b
        return out

    def copy(self):
        return copy.deepcopy(self)


def init_model(window, hidden_size=32, attention=True, horizon=1, scale=1.0, rng=None, attention_size=None):
    """Randomly initialized model, weights uniform in +-1/sqrt(fan_in)."""
    rng = np.random.default_rng(rng)
    attention_size = attention_size or hidden_size
    lstm1 = LstmParams.init(1, hidden_size, rng)
    att = AttentionParams.init(hidden_size, attention_size, rng) if attention else None
    lstm2 = LstmParams.init(2 * hidden_size, hidden_size, rng)
    bound = 1.0 / np.sqrt(hidden_size)
    fc_w = rng.uniform(-bound, bound, hidden_size)
    fc_b = rng.uniform(-bound, bound, 1)
    return PredictorModel(lstm1, lstm2, att, fc_w, fc_b, window, horizon, scale)


def zero_model(window, hidden_size=4, attention=True, horizon=1, scale=1.0, fc_bias=0.0):
    return PredictorModel(
        LstmParams.zeros(1, hidden_size),
        LstmParams.zeros(2 * hidden_size, hidden_size),
        AttentionParams.zeros(hidden_size, hidden_size) if attention else None,
        np.zeros(hidden_size),
        np.array([float(fc_bias)]),
        window, horizon, scale,
    )


# -- single-step primitives -------------------------------------------------

def lstm_cell(x, h_prev, c_prev, params):
    """One LSTM step. Works on vectors or on ``(batch, n)`` arrays."""
    x = np.asarray(x, dtype=float)
    h_prev = np.asarray(h_prev, dtype=float)
    c_prev = np.asarray(c_prev, dtype=float)
    H, I = params.hidden_size, params.input_size
    if x.shape[-1] != I or h_prev.shape[-1] != H or c_prev.shape[-1] != H:
        raise InvalidInputError(
            f"shape mismatch: x {x.shape}, h {h_prev.shape}, c {c_prev.shape} for input {I}, hidden {H}")
    W, b = params.stacked()
    zin = np.concatenate([h_prev, x], axis=-1) @ W.T + b
    f = sigmoid(zin[..., :H])
    u = sigmoid(zin[..., H:2 * H])
    c_tilde = np.tanh(zin[..., 2 * H:3 * H])
    o = sigmoid(zin[..., 3 * H:])
    c = f * c_prev + u * c_tilde
    return o * np.tanh(c), c


def bahdanau_attention(s, h_query, params):
    """Attention context over states ``s`` (q, H) for one query (H,).

    Returns ``(z, a)`` with ``a`` the softmax weights over the q states.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 2 or s.shape[0] == 0:
        raise InvalidInputError("attention needs a non-empty (q, H) state sequence")
    e = np.tanh(s @ params.W_u.T + params.W_h @ h_query) @ params.V
    a = softmax(e)
    return a @ s, a


# -- batched forward / backward -----------------------------------------------

def _lstm_forward(X, params):
    """Unroll over X (B, T, I); returns states (B, T, H) and a cache."""
    B, T, _ = X.shape
    H = params.hidden_size
    W, b = params.stacked()
    WT = np.ascontiguousarray(W.T)
    gs = _gate_scale(H)
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    hs = np.empty((B, T, H))
    steps = []
    for t in range(T):
        hx = np.concatenate([h, X[:, t]], axis=1)
        act = np.tanh((hx @ WT + b) * gs)
        f = 0.5 * act[:, :H] + 0.5
        u = 0.5 * act[:, H:2 * H] + 0.5
        o = 0.5 * act[:, 3 * H:] + 0.5
        ct = act[:, 2 * H:3 * H]
        c_prev = c
        c = f * c_prev + u * ct
        tc = np.tanh(c)
        h = o * tc
        hs[:, t] = h
        steps.append((hx, f, u, ct, o, c_prev, tc))
    return hs, (W, steps)


def _lstm_backward(dhs, cache, H):
    """BPTT given dL/dh_t for every step; returns (dX, dW, db)."""
    W, steps = cache
    B, T, _ = dhs.shape
    dW = np.zeros_like(W)
    db = np.zeros(W.shape[0])
    dX = np.empty((B, T, W.shape[1] - H))
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        hx, f, u, ct, o, c_prev, tc = steps[t]
        dh = dhs[:, t] + dh_next
        do = dh * tc
        dc = dc_next + dh * o * (1.0 - tc * tc)
        dz = np.concatenate([
            dc * c_prev * f * (1.0 - f),
            dc * ct * u * (1.0 - u),
            dc * u * (1.0 - ct * ct),
            do * o * (1.0 - o),
        ], axis=1)
        dW += dz.T @ hx
        db += dz.sum(axis=0)
        dhx = dz @ W
        dh_next = dhx[:, :H]
        dX[:, t] = dhx[:, H:]
        dc_next = dc * f
    return dX, dW, db


def _split_gates(dW, db, H):
    out = {}
    for k, g in enumerate(GATES):
        out[f"W_{g}"] = dW[k * H:(k + 1) * H]
        out[f"b_{g}"] = db[k * H:(k + 1) * H]
    return out


def forward_batch(model, Xn, return_cache=False):
    """Normalized predictions for normalized windows ``Xn`` of shape (B, q)."""
    Xn = np.asarray(Xn, dtype=float)
    if Xn.ndim != 2 or Xn.shape[1] != model.window:
        raise InvalidInputError(f"expected windows of shape (batch, {model.window}), got {Xn.shape}")
    B, q = Xn.shape
    H = model.lstm1.hidden_size
    S, c1 = _lstm_forward(Xn[:, :, None], model.lstm1)
    Hprev = np.concatenate([np.zeros((B, 1, H)), S[:, :-1]], axis=1)
    att_cache = None
    if model.attention is not None:
        p = model.attention
        K = S @ p.W_u.T  # (B, q_j, A)
        Q = Hprev @ p.W_h.T  # (B, q_i, A)
        Tn = np.tanh(K[:, None, :, :] + Q[:, :, None, :])  # (B, q_i, q_j, A)
        E = Tn @ p.V
        A = softmax(E, axis=-1)
        Z = A @ S
        att_cache = (Tn, A)
    else:
        Z = S
    X2 = np.concatenate([Z, Hprev], axis=2)
    S2, c2 = _lstm_forward(X2, model.lstm2)
    y = S2[:, -1] @ model.fc_w + model.fc_b[0]
    if not return_cache:
        return y
    return y, (Xn, S, Hprev, att_cache, X2, c1, S2, c2)


def backward_batch(model, cache, dy):
    """Gradients of a loss with dL/dy = ``dy`` (shape (B,)) for every parameter."""
    Xn, S, Hprev, att_cache, X2, c1, S2, c2 = cache
    B, q = Xn.shape
    H = model.lstm1.hidden_size
    H2 = model.lstm2.hidden_size
    grads = {"fc.w": S2[:, -1].T @ dy, "fc.b": np.array([dy.sum()])}

    dS2 = np.zeros_like(S2)
    dS2[:, -1] = np.outer(dy, model.fc_w)
    dX2, dW2, db2 = _lstm_backward(dS2, c2, H2)
    for k, v in _split_gates(dW2, db2, H2).items():
        grads[f"lstm2.{k}"] = v

    dZ = dX2[:, :, :H]
    dHprev = dX2[:, :, H:].copy()
    if model.attention is not None:
        p = model.attention
        Tn, A = att_cache
        dA = dZ @ S.transpose(0, 2, 1)
        dS = A.transpose(0, 2, 1) @ dZ
        dE = A * (dA - (dA * A).sum(axis=-1, keepdims=True))
        grads["attention.V"] = np.einsum("bij,bija->a", dE, Tn)
        dPre = dE[..., None] * p.V * (1.0 - Tn * Tn)
        dK = dPre.sum(axis=1)
        dQ = dPre.sum(axis=2)
        grads["attention.W_u"] = np.einsum("bja,bjh->ah", dK, S)
        grads["attention.W_h"] = np.einsum("bia,bih->ah", dQ, Hprev)
        dS += dK @ p.W_u
        dHprev += dQ @ p.W_h
    else:
        dS = dZ.copy()
    # Hprev[:, i] is S[:, i-1]; Hprev[:, 0] is the constant zero state
    dS[:, :-1] += dHprev[:, 1:]
    _, dW1, db1 = _lstm_backward(dS, c1, H)
    for k, v in _split_gates(dW1, db1, H).items():
        grads[f"lstm1.{k}"] = v
    return grads


def rmse_loss(y, t):
    return float(np.sqrt(np.mean((y - t) ** 2)))


def rmse_and_grads(model, Xn, tn):
    """RMSE on normalized data and its gradient for every parameter."""
    y, cache = forward_batch(model, Xn, return_cache=True)
    err = y - tn
    loss = float(np.sqrt(np.mean(err**2)))
    dy = err / (len(err) * loss) if loss > 0 else np.zeros_like(err)
    return loss, backward_batch(model, cache, dy)


def forward(window, model):
    """Predicted next value (in counts) for one window of ``q`` raw counts."""
    w = np.asarray(window, dtype=float)
    if w.shape != (model.window,):
        raise InvalidInputError(f"window must have length {model.window}, got shape {w.shape}")
    return float(forward_batch(model, w[None, :] / model.scale)[0] * model.scale)


def gradient_check(model, sample, step=1e-5, floor=1e-6):
    """Largest relative gap between analytic and central-difference gradients.

    ``sample`` is a ``(window, target)`` pair in raw counts; the loss is the
    RMSE in normalized units. Relative error is ``|a - n| / max(|a|, |n|, floor)``.
    """
    window, target = sample
    Xn = np.asarray(window, dtype=float)[None, :] / model.scale
    tn = np.array([float(target) / model.scale])
    work = model.copy()
    _, grads = rmse_and_grads(work, Xn, tn)
    worst = 0.0
    for name, p in work.parameters().items():
        g = grads[name]
        flat = p.reshape(-1)
        gflat = g.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + step
            lp = rmse_loss(forward_batch(work, Xn), tn)
            flat[k] = orig - step
            lm = rmse_loss(forward_batch(work, Xn), tn)
            flat[k] = orig
            num = (lp - lm) / (2 * step)
            rel = abs(gflat[k] - num) / max(abs(gflat[k]), abs(num), floor)
            worst = max(worst, rel)
    return worst


def round_prediction(y):
    """Round half away from zero, then clamp at zero."""
    y = float(y)
    if not np.isfinite(y):
        raise InvalidInputError(f"prediction must be finite, got {y!r}")
    r = np.floor(abs(y) + 0.5)
    return int(max(np.copysign(r, y), 0))
