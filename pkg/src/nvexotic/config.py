"""Experiment configuration files.

A config is a YAML mapping of named blocks. Key names carry their unit as a
suffix (``d0_um``, ``tau_us``, ...); everything is converted to SI on load.
Missing keys take the published values below and unknown keys are rejected.
"""

import copy
import hashlib
import json
import math

import numpy as np
import yaml

from .exceptions import ConfigError
from .geometry import SourceGeometry
from .inference import PhaseEstimate, Setup, lambda_from_mass, measured_parameters
from .kinematics import VibrationModel
from .spin import SequenceConfig, Variant

# Contrast that reproduces a 0.0014 rad phase error from 6e7 shots spread over
# the default 16-point microwave-phase grid.
CALIBRATED_CONTRAST = 0.1301

DEFAULTS = {
    "geometry": {
        "radius_um": 250.0,
        "thickness_um": 250.0,
        "rho_per_m3": 1.33e30,
        "offset_x_um": 0.0,
        "offset_y_um": 0.0,
    },
    "vibration": {
        "d0_um": 2.0,
        "amplitude_nm": 165.2,
        "frequency_khz": 74.452,
        "velocity_sign": 1,
    },
    "sensor": {
        "theta_deg": math.degrees(math.acos(1 / math.sqrt(3))),
        "tau_us": 6.652,
        "pi_half_ns": 64.0,
        "pi_ns": 127.0,
        "laser_init_us": 2.0,
        "laser_readout_us": 4.4,
        "variant": "plus",
        "finite_pulses": False,
        "contrast": CALIBRATED_CONTRAST,
        "shots": 60_000_000,
        "phi_mw_points": 16,
    },
    "hypothesis": {
        "lambda_um": [200.0],
        "mass_ev": None,
        "g": 1.0e-18,
    },
    "analysis": {
        "cl": 0.95,
        "quad_tol": 1.0e-8,
        "samples_per_tau": 4096,
        "time_steps": 4000,
        "seed": 0,
        "phi_central_rad": 0.0011,
        "sigma_stat_rad": 0.0014,
        "reference": "limit",
        "n_jobs": 1,
    },
    "systematics": {
        "theta_sigma_deg": 0.6,
        "d0_sigma_um": 0.1,
        "diameter_sigma_um": 2.5,
        "thickness_sigma_um": 35.0,
        "amplitude_sigma_nm": 0.1,
        "xy_offset_um": 1.3,
        "xy_offset_sigma_um": 0.8,
    },
}

_INTEGER_KEYS = {"shots", "phi_mw_points", "samples_per_tau", "time_steps", "seed", "n_jobs", "velocity_sign"}
_CHOICES = {"variant": ("plus", "minus"), "reference": ("limit", "central")}
_NONNEGATIVE = {
    "thickness_um", "rho_per_m3", "amplitude_nm", "pi_half_ns", "pi_ns", "laser_init_us",
    "laser_readout_us", "theta_sigma_deg", "d0_sigma_um", "diameter_sigma_um",
    "thickness_sigma_um", "amplitude_sigma_nm", "xy_offset_sigma_um", "sigma_stat_rad", "seed",
}
_POSITIVE = {"radius_um", "d0_um", "frequency_khz", "tau_us", "shots", "phi_mw_points",
             "quad_tol", "samples_per_tau", "time_steps", "n_jobs"}


def _check_scalar(path, key, value, default):
    if key in _CHOICES:
        if value not in _CHOICES[key]:
            raise ConfigError(path, f"must be one of {_CHOICES[key]}")
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, "must be true or false")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, "must be a number")
    if key in _INTEGER_KEYS:
        if value != int(value):
            raise ConfigError(path, "must be an integer")
        value = int(value)
    else:
        value = float(value)
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if key in _POSITIVE and not value > 0:
        raise ConfigError(path, "must be positive")
    if key in _NONNEGATIVE and value < 0:
        raise ConfigError(path, "must be non-negative")
    return value


def _check_list(path, value):
    if value is None:
        return None
    if not isinstance(value, (list, tuple)):
        value = [value]
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"{path}[{i}]", "must be a positive number")
        out.append(float(v))
    if not out:
        raise ConfigError(path, "must not be empty")
    return out


def merge(user):
    """Validate ``user`` and merge it over the defaults."""
    if user is None:
        user = {}
    if not isinstance(user, dict):
        raise ConfigError("<root>", "config must be a mapping of blocks")
    merged = copy.deepcopy(DEFAULTS)
    for block, entries in user.items():
        if block not in DEFAULTS:
            raise ConfigError(block, "unknown block")
        if entries is None:
            continue
        if not isinstance(entries, dict):
            raise ConfigError(block, "block must be a mapping")
        for key, value in entries.items():
            path = f"{block}.{key}"
            if key not in DEFAULTS[block]:
                raise ConfigError(path, "unknown key")
            if key in ("lambda_um", "mass_ev"):
                merged[block][key] = _check_list(path, value)
            else:
                merged[block][key] = _check_scalar(path, key, value, DEFAULTS[block][key])
    hyp = merged["hypothesis"]
    if "mass_ev" in (user.get("hypothesis") or {}) and hyp["mass_ev"] is not None:
        if "lambda_um" in (user.get("hypothesis") or {}):
            raise ConfigError("hypothesis", "give lambda_um or mass_ev, not both")
        hyp["lambda_um"] = None
    if merged["geometry"]["thickness_um"] > 2 * merged["geometry"]["radius_um"]:
        raise ConfigError("geometry.thickness_um", "must not exceed the sphere diameter")
    cl = merged["analysis"]["cl"]
    if not 0.5 < cl < 1:
        raise ConfigError("analysis.cl", "must lie in (0.5, 1)")
    if not 0 < merged["sensor"]["contrast"] <= 1:
        raise ConfigError("sensor.contrast", "must lie in (0, 1]")
    if merged["vibration"]["velocity_sign"] not in (1, -1):
        raise ConfigError("vibration.velocity_sign", "must be 1 or -1")
    if not merged["analysis"]["quad_tol"] <= 1e-2:
        raise ConfigError("analysis.quad_tol", "must not exceed 1e-2")
    return merged


def load(path):
    """Read and validate a config file; ``None`` gives the defaults."""
    if path is None:
        return ExperimentConfig(merge({}))
    with open(path) as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError("<file>", f"not valid YAML: {exc}") from None
    return ExperimentConfig(merge(raw))


class ExperimentConfig:
    """Validated, defaults-merged configuration with SI accessors."""

    def __init__(self, values):
        self.values = values

    @classmethod
    def from_dict(cls, user):
        return cls(merge(user))

    def dump(self):
        return yaml.safe_dump(self.values, sort_keys=True)

    def digest(self):
        blob = json.dumps(self.values, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def _block(self, name):
        return self.values[name]

    def geometry(self):
        g = self._block("geometry")
        return SourceGeometry(
            radius=g["radius_um"] * 1e-6,
            thickness=g["thickness_um"] * 1e-6,
            number_density=g["rho_per_m3"],
            lateral_offset=(g["offset_x_um"] * 1e-6, g["offset_y_um"] * 1e-6),
        )

    def vibration(self):
        v = self._block("vibration")
        return VibrationModel(
            d0=v["d0_um"] * 1e-6,
            amplitude=v["amplitude_nm"] * 1e-9,
            omega=2 * math.pi * v["frequency_khz"] * 1e3,
            velocity_sign=v["velocity_sign"],
        )

    def sequence(self, variant=None):
        s = self._block("sensor")
        return SequenceConfig(
            tau=s["tau_us"] * 1e-6,
            variant=Variant(variant or s["variant"]),
            pi_half_duration=s["pi_half_ns"] * 1e-9,
            pi_duration=s["pi_ns"] * 1e-9,
            laser_init_duration=s["laser_init_us"] * 1e-6,
            laser_readout_duration=s["laser_readout_us"] * 1e-6,
            finite_pulses=s["finite_pulses"],
        )

    @property
    def theta(self):
        return math.radians(self._block("sensor")["theta_deg"])

    def setup(self, variant=None):
        a = self._block("analysis")
        return Setup(
            geometry=self.geometry(),
            vibration=self.vibration(),
            theta=self.theta,
            sequence=self.sequence(variant),
            quad_tol=a["quad_tol"],
            samples_per_tau=a["samples_per_tau"],
        )

    def force_ranges(self):
        h = self._block("hypothesis")
        if h["lambda_um"] is not None:
            return np.array(h["lambda_um"]) * 1e-6
        return lambda_from_mass(np.array(h["mass_ev"]))

    def phase_estimate(self):
        a = self._block("analysis")
        return PhaseEstimate(a["phi_central_rad"], a["sigma_stat_rad"])

    def systematic_parameters(self, setup=None):
        s = self._block("systematics")
        return measured_parameters(
            setup or self.setup(),
            theta_sigma=math.radians(s["theta_sigma_deg"]),
            d0_sigma=s["d0_sigma_um"] * 1e-6,
            diameter_sigma=s["diameter_sigma_um"] * 1e-6,
            thickness_sigma=s["thickness_sigma_um"] * 1e-6,
            amplitude_sigma=s["amplitude_sigma_nm"] * 1e-9,
            xy_offset=s["xy_offset_um"] * 1e-6,
            xy_offset_sigma=s["xy_offset_sigma_um"] * 1e-6,
        )

    def phi_mw_grid(self):
        n = self._block("sensor")["phi_mw_points"]
        return np.linspace(0.0, 2 * math.pi, n, endpoint=False)

    def __getitem__(self, key):
        return self.values[key]
