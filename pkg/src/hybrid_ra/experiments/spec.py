"""Experiment descriptions, figure presets and the flat config-file format."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

from ..access import POLICIES
from ..exceptions import InvalidConfigError
from ..geometry import DEFAULT_QUANTUM_M, annulus_count

SCHEMES = POLICIES + ("tara",)
URLLC_MODES = ("fixed", "poisson")

DEFAULT_PREAMBLE_SWEEP = (10, 20, 30, 40, 50, 60)
DEFAULT_MMTC_SWEEP = (20, 40, 60, 80, 100, 120, 140)
_SWEEPS = ("scheme", "R", "num_preambles", "Na")


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep over cell radius, preamble count and active mMTC devices.

    Field names double as config-file keys. ``urllc_mode="fixed"`` gives every
    slot ``urllc_count`` URLLC devices with a perfect forecast;
    ``"poisson"`` draws Poisson(``urllc_lambda``) arrivals and sizes the
    URLLC resource from a trained attention-LSTM forecast.
    ``unmatched_top_level=True`` lets unmatched IHRA devices also draw the top
    power level that is otherwise reserved for TA-matched devices.
    """

    scheme: tuple = SCHEMES
    R: tuple = (800.0, 1200.0)
    quantum_m: float = DEFAULT_QUANTUM_M
    num_preambles: tuple = (40,)
    Na: tuple = (80,)
    L: int = 4
    unmatched_top_level: bool = False
    urllc_mode: str = "fixed"
    urllc_count: int = 0
    urllc_lambda: float = 5.0
    trials: int = 10_000
    seed: int = 0
    name: str = "custom"
    predictor_window: int = 10
    predictor_horizon: int = 5
    predictor_hidden: int = 32
    predictor_epochs: int = 200
    predictor_train_slots: int = 10_000

    def __post_init__(self):
        for key in _SWEEPS:
            value = getattr(self, key)
            if isinstance(value, (str, int, float)):
                value = (value,)
            if not isinstance(value, (list, tuple)):
                raise InvalidConfigError(f"{key}: expected a value or a list, got {value!r}", key)
            object.__setattr__(self, key, tuple(value))
        try:
            object.__setattr__(self, "R", tuple(float(r) for r in self.R))
        except (TypeError, ValueError):
            raise InvalidConfigError(f"R: radii must be numbers, got {self.R!r}", "R") from None
        self.validate()

    def validate(self):
        for key in _SWEEPS:
            if not getattr(self, key):
                raise InvalidConfigError(f"{key}: sweep must not be empty", key)
        for s in self.scheme:
            if s not in SCHEMES:
                raise InvalidConfigError(f"scheme: unknown scheme {s!r}; expected one of {SCHEMES}", "scheme")
        for key in _SWEEPS:
            if len(set(getattr(self, key))) != len(getattr(self, key)):
                raise InvalidConfigError(f"{key}: duplicate values in sweep", key)
        if not _is_number(self.quantum_m) or self.quantum_m <= 0:
            raise InvalidConfigError(f"quantum_m: must be > 0, got {self.quantum_m!r}", "quantum_m")
        for r in self.R:
            try:
                annulus_count(r, self.quantum_m)
            except InvalidConfigError as exc:
                raise InvalidConfigError(f"R: {exc}", "R") from None
        if not all(_is_int(t) and t >= 1 for t in self.num_preambles):
            raise InvalidConfigError("num_preambles: values must be integers >= 1", "num_preambles")
        if not all(_is_int(n) and n >= 0 for n in self.Na):
            raise InvalidConfigError("Na: values must be integers >= 0", "Na")
        checks = [
            ("L", _is_int(self.L) and self.L >= 1),
            ("unmatched_top_level", isinstance(self.unmatched_top_level, bool)),
            ("trials", _is_int(self.trials) and self.trials >= 1),
            ("seed", _is_int(self.seed) and 0 <= self.seed < 2**64),
            ("urllc_mode", self.urllc_mode in URLLC_MODES),
            ("urllc_count", _is_int(self.urllc_count) and self.urllc_count >= 0),
            ("urllc_lambda", _is_number(self.urllc_lambda) and self.urllc_lambda >= 0),
            ("predictor_window", _is_int(self.predictor_window) and self.predictor_window >= 1),
            ("predictor_horizon", _is_int(self.predictor_horizon) and self.predictor_horizon >= 1),
            ("predictor_hidden", _is_int(self.predictor_hidden) and self.predictor_hidden >= 1),
            ("predictor_epochs", _is_int(self.predictor_epochs) and self.predictor_epochs >= 0),
            ("predictor_train_slots", _is_int(self.predictor_train_slots)
             and self.predictor_train_slots >= self.predictor_window + self.predictor_horizon + 1),
            ("name", isinstance(self.name, str) and self.name != ""),
        ]
        for key, ok in checks:
            if not ok:
                raise InvalidConfigError(f"{key}: invalid value {getattr(self, key)!r}", key)

    def to_dict(self):
        d = asdict(self)
        for key in _SWEEPS:
            d[key] = list(d[key])
        return d


@dataclass(frozen=True)
class Fig2Spec:
    """Attention-LSTM vs plain-LSTM forecasting on Poisson URLLC arrivals."""

    urllc_lambda: float = 5.0
    slots: int = 10_000
    horizon: int = 5
    window: int = 10
    hidden_size: int = 32
    learning_rate: float = 1e-3
    epochs: int = 200
    patience: int = 10
    batch_size: int = 32
    optimizer: str = "sgd"
    test_fraction: float = 0.2
    seeds: tuple = field(default=(0, 1, 2, 3, 4))
    name: str = "fig2"

    def to_dict(self):
        d = asdict(self)
        d["seeds"] = list(d["seeds"])
        return d


def preset_fig2():
    return Fig2Spec()


def preset_fig4():
    """Successful mMTC devices vs preambles, Na=80, L=4, R in {800, 1200}."""
    return ExperimentSpec(num_preambles=DEFAULT_PREAMBLE_SWEEP, Na=(80,), L=4, urllc_count=0, name="fig4")


def preset_fig5():
    """Successful devices vs active mMTC devices, 40 preambles, 3 URLLC devices."""
    return ExperimentSpec(num_preambles=(40,), Na=DEFAULT_MMTC_SWEEP, L=4, urllc_count=3, name="fig5")


PRESETS = {"fig2": preset_fig2, "fig4": preset_fig4, "fig5": preset_fig5}


def spec_from_dict(doc):
    if not isinstance(doc, dict):
        raise InvalidConfigError("config must be a flat key-value object")
    known = {f.name for f in fields(ExperimentSpec)}
    for key, value in doc.items():
        if key not in known:
            raise InvalidConfigError(f"{key}: unknown config key", key)
        if isinstance(value, dict):
            raise InvalidConfigError(f"{key}: nested values are not allowed", key)
    try:
        return ExperimentSpec(**doc)
    except TypeError as exc:
        raise InvalidConfigError(str(exc)) from None


def load_spec(path):
    """Read an :class:`ExperimentSpec` from a flat JSON object."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"{path}: not valid JSON ({exc})") from None
    return spec_from_dict(doc)
