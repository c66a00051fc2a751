import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhscellfree.config import (
    ConfigError,
    ExperimentConfig,
    config_from_dict,
    emit_config,
    parse_config,
)


def test_defaults():
    c = parse_config()
    assert (c.wavelength, c.density, c.nx, c.ny) == (0.01, 1e-3, 64, 64)
    assert (c.dx, c.dy, c.d0, c.alpha, c.height, c.radius) == (5e-3, 5e-3, 0.2, 4.0, 10.0, 100.0)
    assert c.geometry.n == 4096


def test_rf_gain_db():
    assert config_from_dict({"rf_gain_db": 10}).alpha == pytest.approx(4.0, rel=1e-15)


def test_power_and_noise_db():
    c = config_from_dict({"power_db": 20, "noise_db": -120})
    assert c.power == pytest.approx(100.0) and c.noise == pytest.approx(1e-12)


@pytest.mark.parametrize("data,key", [
    ({"epsilon_u": 1.5}, "epsilon_u"),
    ({"epsilon_v": -0.1}, "epsilon_v"),
    ({"alpha": 1.0}, "alpha"),
    ({"rf_gain_db": 3}, "alpha"),
    ({"nx": 0}, "nx"),
    ({"wavelength": 0}, "wavelength"),
    ({"bogus": 1}, "bogus"),
    ({"power_db": 10, "power": 3}, "power_db"),
    ({"phase_error": "gauss"}, "phase_error"),
    ({"phase_error": "uniform", "phase_error_power": 4.0}, "phase_error_power"),
    ({"channel_mode": "planar"}, "channel_mode"),
    ({"trials": 2.5}, "trials"),
])
def test_errors_name_the_key(data, key):
    with pytest.raises(ConfigError) as info:
        config_from_dict(data)
    assert info.value.key == key
    assert key in str(info.value)


def test_file_and_overrides(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"power_db": 10, "num_ues": 4}))
    c = parse_config(path, {"power": 5.0, "seed": 3})
    assert (c.power, c.num_ues, c.seed) == (5.0, 4, 3)
    c = parse_config(path, {"power_db": 0})
    assert c.power == 1.0


def test_bad_json(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{")
    with pytest.raises(ConfigError):
        parse_config(path)
    path.write_text("[1]")
    with pytest.raises(ConfigError):
        parse_config(path)


configs = st.builds(
    ExperimentConfig,
    wavelength=st.floats(1e-3, 1.0),
    density=st.floats(1e-5, 1e-1),
    nx=st.integers(1, 128),
    alpha=st.floats(1.01, 10),
    num_ues=st.integers(1, 8),
    power=st.floats(0, 1e6),
    phase_error=st.sampled_from(["none", "von_mises"]),
    phase_error_power=st.floats(0, 5),
    epsilon_u=st.floats(0, 1),
    channel_mode=st.sampled_from(["near", "far-synthetic", "far-mismatched"]),
    seed=st.integers(0, 2**64 - 1),
)


@given(configs)
def test_round_trip(cfg):
    assert config_from_dict(json.loads(emit_config(cfg))) == cfg


def test_digest_tracks_content():
    a = ExperimentConfig()
    assert a.digest() == ExperimentConfig().digest()
    assert a.digest() != a.replace(seed=1).digest()


def test_phase_model_mapping():
    c = ExperimentConfig(phase_error="uniform", phase_error_power=1.0)
    assert c.phase_model.param == pytest.approx(math.sqrt(3.0))
    assert c.xi == pytest.approx(math.sin(math.sqrt(3)) / math.sqrt(3))
