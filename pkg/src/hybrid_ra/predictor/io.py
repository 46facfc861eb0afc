"""JSON model documents and training-curve CSV files."""
from __future__ import annotations

import csv
import json

import numpy as np

from ..exceptions import InvalidInputError
from .network import GATES, AttentionParams, LstmParams, PredictorModel

FORMAT = "hybrid_ra.predictor"
VERSION = 1


def _array(a):
    a = np.asarray(a, dtype=float)
    return {"shape": list(a.shape), "data": a.reshape(-1).tolist()}


def _unarray(doc):
    return np.array(doc["data"], dtype=float).reshape(doc["shape"])


def _lstm_doc(p):
    return {f"{kind}_{g}": _array(getattr(p, f"{kind}_{g}")) for kind in ("W", "b") for g in GATES}


def model_to_dict(model, hyperparameters=None):
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "window": model.window,
        "horizon": model.horizon,
        "scale": model.scale,
        "attention": model.uses_attention,
        "hyperparameters": dict(hyperparameters or {}),
        "params": {
            "lstm1": _lstm_doc(model.lstm1),
            "lstm2": _lstm_doc(model.lstm2),
            "fc": {"w": _array(model.fc_w), "b": _array(model.fc_b)},
        },
    }
    if model.attention is not None:
        a = model.attention
        doc["params"]["attention"] = {"W_u": _array(a.W_u), "W_h": _array(a.W_h), "V": _array(a.V)}
    return doc


def model_from_dict(doc):
    if doc.get("format") != FORMAT:
        raise InvalidInputError(f"not a predictor document: format={doc.get('format')!r}")
    if doc.get("version") != VERSION:
        raise InvalidInputError(f"unsupported predictor document version {doc.get('version')!r}")
    p = doc["params"]
    lstm1 = LstmParams(**{k: _unarray(v) for k, v in p["lstm1"].items()})
    lstm2 = LstmParams(**{k: _unarray(v) for k, v in p["lstm2"].items()})
    att = None
    if doc["attention"]:
        att = AttentionParams(**{k: _unarray(v) for k, v in p["attention"].items()})
    return PredictorModel(lstm1, lstm2, att, _unarray(p["fc"]["w"]), _unarray(p["fc"]["b"]),
                          int(doc["window"]), int(doc["horizon"]), float(doc["scale"]))


def save_model(model, path, hyperparameters=None):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model, hyperparameters), fh)


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))


def write_history_csv(history, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "train_rmse", "val_rmse"])
        for epoch, tr, va in history:
            w.writerow([epoch, repr(float(tr)), repr(float(va))])


def read_history_csv(path):
    with open(path, newline="") as fh:
        return [(int(r["epoch"]), float(r["train_rmse"]), float(r["val_rmse"])) for r in csv.DictReader(fh)]
