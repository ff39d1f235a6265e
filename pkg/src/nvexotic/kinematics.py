"""Time-domain model of the vibrating source.

Time zero is the instant of maximal separation, so ``d(0) = d0 + 2A``. The
velocity follows the convention ``v(t) = A * omega * sin(omega * t)``, which
is the negative of ``d'(t)``: a positive speed means the source is
approaching the sensor. Coupling bounds do not depend on this global sign.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .constants import DEFAULT_CONSTANTS
from .exceptions import DomainError
from .geometry import f_profile


class TimeOrigin(enum.Enum):
    MAX_DISTANCE_AT_ZERO = "max_distance_at_zero"


class Parity(enum.Enum):
    POSITION_EVEN = "position-even"
    VELOCITY_ODD = "velocity-odd"
    CUSTOM = "custom"


@dataclass(frozen=True)
class VibrationModel:
    """Harmonic motion of the source along the sensor axis (SI units)."""

    d0: float = 2.0e-6
    amplitude: float = 165.2e-9
    omega: float = 2 * np.pi * 74.452e3
    t0_convention: TimeOrigin = TimeOrigin.MAX_DISTANCE_AT_ZERO
    velocity_sign: int = 1

    def __post_init__(self):
        if self.velocity_sign not in (1, -1):
            raise DomainError("velocity_sign must be +1 or -1")
        if not self.d0 > 0:
            raise DomainError("d0 must be positive")
        if not self.amplitude >= 0:
            raise DomainError("amplitude must be non-negative")
        if not self.omega > 0:
            raise DomainError("omega must be positive")

    @property
    def period(self):
        return 2 * np.pi / self.omega

    @property
    def peak_speed(self):
        return self.amplitude * self.omega

    @property
    def d_range(self):
        return self.d0, self.d0 + 2 * self.amplitude


@dataclass
class FieldTrace:
    times: np.ndarray
    values: np.ndarray
    parity: Parity = Parity.CUSTOM
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.values.shape:
            raise DomainError("times and values must be 1-D arrays of equal length")
        if self.times.size < 2 or np.any(np.diff(self.times) <= 0):
            raise DomainError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field values must be finite")


def distance_at(model, t):
    """Sensor-to-source distance ``d0 + A (1 + cos(omega t))``."""
    return model.d0 + model.amplitude * (1 + np.cos(model.omega * np.asarray(t, dtype=float)))


def velocity_at(model, t):
    """Signed source speed ``A omega sin(omega t)``.

    ``model.velocity_sign = -1`` selects the opposite orientation of the
    velocity axis.
    """
    return model.velocity_sign * model.amplitude * model.omega * np.sin(model.omega * np.asarray(t, dtype=float))


def field_at(hyp, geometry, model, theta, t, constants=DEFAULT_CONSTANTS, tol=1e-9, profile=None):
    """Effective field (T) at times ``t`` of the vibration cycle.

    ``profile`` optionally supplies a precomputed ``d -> f`` callable, which
    avoids rebuilding it when the same source is sampled repeatedly.
    """
    if profile is None:
        profile = f_profile(hyp.force_range, geometry, *model.d_range, tol=tol)
    t = np.asarray(t, dtype=float)
    prefactor = hyp.g_product / (2 * np.pi * constants.gamma_e) * np.cos(theta)
    return prefactor * profile(distance_at(model, t)) * velocity_at(model, t)


def beff_trace(hyp, geometry, model, theta, window, n_samples, constants=DEFAULT_CONSTANTS, tol=1e-9):
    """Sample the effective field on a uniform grid over ``window``."""
    if n_samples < 2:
        raise DomainError("n_samples must be at least 2")
    t_start, t_end = window
    if not (np.isfinite(t_start) and np.isfinite(t_end) and t_end > t_start):
        raise DomainError("window must be finite with t_end > t_start")
    times = np.linspace(t_start, t_end, n_samples)
    values = field_at(hyp, geometry, model, theta, times, constants, tol)
    return FieldTrace(times, values, Parity.VELOCITY_ODD, {"force_range": hyp.force_range})
