"""Experiment configuration with the default simulation setup.

Configs are flat JSON objects with snake_case keys.  Powers and the RF
chain gain may also be given in dB through ``power_db``, ``noise_db`` and
``rf_gain_db``; they are converted to linear values on parsing.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .channel import RhsGeometry
from .geometry import Region
from .impairments import HardwareQuality, PhaseErrorModel, xi

PHASE_ERROR_KINDS = ("none", "uniform", "von_mises")
CHANNEL_MODES = ("near", "far-synthetic", "far-mismatched")
COMBINERS = ("aware", "naive")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending field."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ExperimentConfig:
    wavelength: float = 1e-2
    density: float = 1e-3
    radius: float = 100.0
    nx: int = 64
    ny: int = 64
    dx: float = 5e-3
    dy: float = 5e-3
    d0: float = 0.2
    alpha: float = 4.0
    height: float = 10.0
    num_ues: int = 1
    power: float = 100.0
    noise: float = 1e-12
    phase_error: str = "none"
    phase_error_power: float = 0.0
    epsilon_u: float = 1.0
    epsilon_v: float = 1.0
    channel_mode: str = "near"
    combiner: str = "aware"
    trials: int = 500
    seed: int = 0

    def __post_init__(self):
        positive = ("wavelength", "density", "radius", "dx", "dy", "d0",
                    "height", "noise")
        for key in positive:
            if not getattr(self, key) > 0:
                raise ConfigError(key, "must be positive")
        for key in ("nx", "ny", "num_ues", "trials"):
            if int(getattr(self, key)) != getattr(self, key) or getattr(self, key) < 1:
                raise ConfigError(key, "must be a positive integer")
        if not self.alpha > 1:
            raise ConfigError("alpha", "feed gain exponent must exceed 1")
        if self.power < 0:
            raise ConfigError("power", "must be nonnegative")
        for key in ("epsilon_u", "epsilon_v"):
            if not 0.0 <= getattr(self, key) <= 1.0:
                raise ConfigError(key, "must lie in [0, 1]")
        if self.phase_error not in PHASE_ERROR_KINDS:
            raise ConfigError("phase_error", f"expected one of {PHASE_ERROR_KINDS}")
        if self.phase_error_power < 0:
            raise ConfigError("phase_error_power", "must be nonnegative")
        if (self.phase_error == "uniform"
                and self.phase_error_power > math.pi**2 / 3):
            raise ConfigError("phase_error_power",
                              "uniform error power cannot exceed pi^2/3")
        if self.channel_mode not in CHANNEL_MODES:
            raise ConfigError("channel_mode", f"expected one of {CHANNEL_MODES}")
        if self.combiner not in COMBINERS:
            raise ConfigError("combiner", f"expected one of {COMBINERS}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")

    @property
    def geometry(self):
        return RhsGeometry(int(self.nx), int(self.ny), self.dx, self.dy,
                           self.d0, self.alpha)

    @property
    def region(self):
        return Region(self.radius)

    @property
    def phase_model(self):
        return PhaseErrorModel.from_power(self.phase_error, self.phase_error_power)

    @property
    def hardware(self):
        return HardwareQuality(self.epsilon_u, self.epsilon_v)

    @property
    def xi(self):
        return xi(self.phase_model)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_DB_KEYS = {"power_db": "power", "noise_db": "noise", "rf_gain_db": "alpha"}


def db_to_linear(value_db):
    return 10.0 ** (value_db / 10.0)


def config_from_dict(data):
    """Build a config from a flat mapping, applying defaults and dB keys."""
    values = {}
    for key, raw in data.items():
        if key in _DB_KEYS:
            target = _DB_KEYS[key]
            if target in data:
                raise ConfigError(key, f"conflicts with {target}")
            try:
                linear = db_to_linear(float(raw))
            except (TypeError, ValueError):
                raise ConfigError(key, "must be a number") from None
            # the RF chain gain is 2 (alpha + 1)
            values[target] = linear / 2.0 - 1.0 if key == "rf_gain_db" else linear
        elif key in _FIELDS:
            values[key] = _coerce(key, raw)
        else:
            raise ConfigError(key, "unknown key")
    return ExperimentConfig(**values)


def _coerce(key, raw):
    default = _FIELDS[key].default
    try:
        if isinstance(default, bool) or isinstance(default, str):
            return str(raw)
        if isinstance(default, int):
            if isinstance(raw, float) and not raw.is_integer():
                raise ValueError
            return int(raw)
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(key, f"invalid value {raw!r}") from None


def parse_config(path=None, overrides=None):
    """Load a JSON config file (or nothing) and apply flag overrides."""
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
    data = dict(data)
    linear_to_db = {v: k for k, v in _DB_KEYS.items()}
    for key, value in (overrides or {}).items():
        # an override replaces the file value in either unit
        data.pop(_DB_KEYS.get(key, linear_to_db.get(key)), None)
        data[key] = value
    return config_from_dict(data)


def emit_config(config):
    """Serialise to the flat JSON format (linear units)."""
    return json.dumps(config.to_dict(), indent=2, sort_keys=True)
