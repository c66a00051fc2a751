"""Uplink simulator and closed-form rate bounds for cell-free networks whose
base stations use reconfigurable holographic surfaces."""

__version__ = "0.1.0"

from .analysis import (
    BoundInputs,
    beta_o_vector,
    bound_high_power,
    bound_infinite_surface,
    bound_special_cases,
    sum_rate_bound,
    epsilon_integral,
    zeta,
)
from .beamforming import (
    effective_channels,
    holographic_phases,
    mmse_combiner,
    sinr_general,
    sinr_mmse_closed_form,
)
from .channel import RhsGeometry, feed_gain_vector, ue_gain_vector
from .config import ConfigError, ExperimentConfig, parse_config
from .geometry import NetworkRealization, Region, UeLayout, sample_ppp
from .impairments import HardwareQuality, PhaseErrorModel, xi
from .simulation import bound_report, ergodic_rate, run_trial, sweep

__all__ = [
    "BoundInputs", "ConfigError", "ExperimentConfig", "HardwareQuality",
    "NetworkRealization", "PhaseErrorModel", "Region", "RhsGeometry", "UeLayout",
    "beta_o_vector", "bound_high_power", "bound_infinite_surface", "bound_report",
    "bound_special_cases", "sum_rate_bound", "effective_channels",
    "epsilon_integral", "ergodic_rate", "feed_gain_vector", "holographic_phases",
    "mmse_combiner", "parse_config", "run_trial", "sample_ppp", "sinr_general",
    "sinr_mmse_closed_form", "sweep", "ue_gain_vector", "xi", "zeta",
]
