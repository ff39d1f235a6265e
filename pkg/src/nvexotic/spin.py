"""Spin-echo sequences, anomalous phase, and readout simulation.

Sequence time starts with the first pi/2 pulse. ``PLUS`` synchronises that
pulse with the source at minimal distance and ``MINUS`` with maximal
distance. With instantaneous pulses the free-evolution windows are
``[0, tau]`` and ``[tau, 2 tau]``. In finite-pulse mode the pulses take their
stated durations and no phase accrues while they run.
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .constants import DEFAULT_CONSTANTS
from .exceptions import ConvergenceError, DomainError
from .geometry import f_profile
from .kinematics import FieldTrace, Parity, field_at


class Variant(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


class PhaseMethod(enum.Enum):
    ANALYTIC = "analytic"
    TIME_DOMAIN = "timedomain"


@dataclass(frozen=True)
class SequenceConfig:
    """Timing of the pi/2 - tau - pi - tau - pi/2 echo (SI units)."""

    tau: float = 6.652e-6
    variant: Variant = Variant.PLUS
    pi_half_duration: float = 64e-9
    pi_duration: float = 127e-9
    laser_init_duration: float = 2.0e-6
    laser_readout_duration: float = 4.4e-6
    phi_mw: float = 0.0
    finite_pulses: bool = False

    def __post_init__(self):
        if not self.tau > 0:
            raise DomainError("tau must be positive")
        for name in ("pi_half_duration", "pi_duration", "laser_init_duration", "laser_readout_duration"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")
        object.__setattr__(self, "variant", Variant(self.variant))

    def sync_time(self, model):
        """Vibration time that coincides with sequence time zero."""
        return np.pi / model.omega if self.variant is Variant.PLUS else 0.0

    def windows(self):
        """Free-evolution windows in sequence time as ``(start, stop, sign)``."""
        if not self.finite_pulses:
            return [(0.0, self.tau, 1.0), (self.tau, 2 * self.tau, -1.0)]
        first = self.pi_half_duration
        second = first + self.tau + self.pi_duration
        return [(first, first + self.tau, 1.0), (second, second + self.tau, -1.0)]

    @property
    def duration(self):
        return self.windows()[-1][1] + (self.pi_half_duration if self.finite_pulses else 0.0)


@dataclass(frozen=True)
class PhaseResult:
    phi: float
    method: PhaseMethod


def _detuning(hyp, geometry, model, theta, seq, constants, tol):
    # Angular detuning gamma_e * B as a function of sequence time.
    profile = f_profile(hyp.force_range, geometry, *model.d_range, tol=tol)
    t_sync = seq.sync_time(model)

    def detuning(t):
        b = field_at(hyp, geometry, model, theta, np.asarray(t) + t_sync, constants, profile=profile)
        return constants.gamma_e * b

    return detuning


def _simpson_phase(detuning, seq, n):
    phi = 0.0
    for start, stop, sign in seq.windows():
        t = np.linspace(start, stop, n + 1)
        phi += sign * simpson(detuning(t), x=t)
    return phi


def accumulated_phase(hyp, geometry, model, theta, seq, constants=DEFAULT_CONSTANTS,
                      samples_per_tau=4096, tol=1e-9, rtol=1e-9):
    """Anomalous echo phase (rad) by composite Simpson integration.

    The result is checked against a run on a doubled grid; disagreement
    beyond ``rtol`` raises :class:`ConvergenceError`.
    """
    n = int(samples_per_tau) + int(samples_per_tau) % 2
    if n < 2:
        raise DomainError("samples_per_tau must be at least 2")
    detuning = _detuning(hyp, geometry, model, theta, seq, constants, tol)
    coarse = _simpson_phase(detuning, seq, n)
    fine = _simpson_phase(detuning, seq, 2 * n)
    if abs(fine - coarse) > rtol * abs(fine) + 1e-300:
        raise ConvergenceError(
            "echo phase not converged under grid doubling",
            estimate=fine,
            error=abs(fine - coarse),
            diagnostics={"samples_per_tau": n, "coarse": coarse, "fine": fine},
        )
    return PhaseResult(float(fine), PhaseMethod.ANALYTIC)


def echo_response(trace, seq, gamma_e=DEFAULT_CONSTANTS.gamma_e):
    """Echo phase (rad) picked up from an arbitrary field trace.

    ``trace.times`` are in sequence time and must cover the whole sequence.
    """
    windows = seq.windows()
    t = trace.times
    if t[0] > windows[0][0] or t[-1] < windows[-1][1]:
        raise DomainError("trace does not cover the echo sequence")
    spline = CubicSpline(t, trace.values)
    return float(gamma_e * sum(sign * spline.integrate(a, b) for a, b, sign in windows))


def sequence_trace(hyp, geometry, model, theta, seq, n_samples=8193, constants=DEFAULT_CONSTANTS, tol=1e-9):
    """Effective-field trace over the sequence, in sequence time."""
    times = np.linspace(0.0, seq.duration, n_samples)
    values = field_at(hyp, geometry, model, theta, times + seq.sync_time(model), constants, tol)
    return FieldTrace(times, values, Parity.VELOCITY_ODD, {"variant": seq.variant.value})


def populations(phi, phi_mw):
    """Bright-state populations ``(P_plus, P_minus)`` of the two sync variants."""
    p_plus = 0.5 * (1 + np.cos(phi_mw + phi))
    p_minus = 0.5 * (1 + np.cos(phi_mw - phi))
    return p_plus, p_minus


def _rotation(angle, axis_phase):
    c = np.cos(angle / 2)
    s = np.sin(angle / 2)
    return np.array(
        [[c, -1j * s * np.exp(-1j * axis_phase)], [-1j * s * np.exp(1j * axis_phase), c]]
    )


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(3)


def _free_propagators(detuning, start, stop, n_steps):
    # Per-step propagators of H(t) = -delta(t)/2 sigma_z. H commutes with
    # itself at all times, so each step is exact given the step's integrated
    # detuning, which is taken with 3-point Gauss-Legendre.
    edges = np.linspace(start, stop, n_steps + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    theta = (detuning(nodes.ravel()).reshape(nodes.shape) @ _GL_WEIGHTS) * half
    return np.exp(0.5j * theta), np.exp(-0.5j * theta)


def propagate(detuning, seq, n_steps):
    """State vector (|0>, |-1>) just before the final pi/2 pulse."""
    state = _rotation(np.pi / 2, 0.0) @ np.array([1.0 + 0j, 0.0])
    per_window = max(n_steps // 2, 1)
    for k, (start, stop, _) in enumerate(seq.windows()):
        up, down = _free_propagators(detuning, start, stop, per_window)
        for u, w in zip(up, down):
            state = np.array([u * state[0], w * state[1]])
        if k == 0:
            state = _rotation(np.pi, 0.0) @ state
    return state


def final_population(state, phi_mw):
    """Population of |0> after the closing pi/2 pulse of phase ``phi_mw``."""
    out = _rotation(np.pi / 2, -phi_mw) @ state
    return float(abs(out[0]) ** 2)


def time_domain_phase(hyp, geometry, model, theta, seq, constants=DEFAULT_CONSTANTS, n_steps=2000, tol=1e-9):
    """Echo phase from explicit two-level propagation through the sequence.

    Pulses are ideal rotations. The phase is read off the coherence of the
    final state relative to the field-free reference.
    """
    if n_steps < 1000:
        raise DomainError("n_steps must be at least 1000")
    detuning = _detuning(hyp, geometry, model, theta, seq, constants, tol)
    state = propagate(detuning, seq, n_steps)
    norm = abs(state[0]) ** 2 + abs(state[1]) ** 2
    if abs(norm - 1) > 1e-10:
        raise ConvergenceError("propagation lost unitarity", diagnostics={"norm": norm, "n_steps": n_steps})
    # Field-free reference coherence is +i.
    phi = np.angle(state[1] / state[0] / 1j)
    return PhaseResult(float(phi), PhaseMethod.TIME_DOMAIN)


def _as_generator(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def simulate_readout(i_true, shots, contrast, rng=None, p_sum=1.0):
    """Simulate a binomial measurement of ``I = P_plus - P_minus``.

    ``shots`` is split evenly between the two sync variants. Each shot reads
    the bright state with probability ``1/2 + contrast (P - 1/2)``.
    ``p_sum`` is ``P_plus + P_minus``; it equals 1 at ``phi_mw = pi/2`` and
    ``1 + cos(phi_mw) cos(phi)`` in general.

    Returns
    -------
    i_hat, std_error : float
    """
    if shots < 1:
        raise DomainError("shots must be at least 1")
    if not 0 < contrast <= 1:
        raise DomainError("contrast must lie in (0, 1]")
    rng = _as_generator(rng)
    n = max(int(shots) // 2, 1)
    q = 0.5 + contrast * (np.array([p_sum + i_true, p_sum - i_true]) / 2 - 0.5)
    k = rng.binomial(n, q)
    p_hat = (k / n - 0.5) / contrast + 0.5
    se = np.sqrt(np.sum(q * (1 - q)) / n) / contrast
    return float(p_hat[0] - p_hat[1]), float(se)


def readout_sigma(phi_mw, phi, shots_per_point, contrast):
    """Expected standard error of I at each microwave phase."""
    phi_mw = np.asarray(phi_mw, dtype=float)
    p_plus, p_minus = populations(phi, phi_mw)
    n = np.maximum(shots_per_point // 2, 1)
    var = 0.0
    for p in (p_plus, p_minus):
        q = 0.5 + contrast * (p - 0.5)
        var = var + q * (1 - q)
    return np.sqrt(var / n) / contrast


def phase_sigma(phi_mw, phi, total_shots, contrast):
    """Fisher-information standard error of the fitted phase."""
    phi_mw = np.asarray(phi_mw, dtype=float)
    sig = readout_sigma(phi_mw, phi, total_shots // phi_mw.size, contrast)
    info = np.sum((np.sin(phi_mw) * np.cos(phi) / sig) ** 2)
    return 1 / np.sqrt(info)


def calibrate_contrast(target_sigma, total_shots, phi_mw, phi=0.0):
    """Contrast for which ``phase_sigma`` equals ``target_sigma``."""
    func = lambda c: phase_sigma(phi_mw, phi, total_shots, c) - target_sigma
    if func(1.0) > 0:
        raise DomainError("target sigma unreachable even at unit contrast")
    return brentq(func, 1e-9, 1.0, xtol=1e-15, rtol=1e-13)


def synthetic_dataset(phi, phi_mw, total_shots, contrast, rng=None):
    """Noisy ``(phi_mw, I, sigma_I)`` rows for a true phase ``phi``."""
    rng = _as_generator(rng)
    phi_mw = np.asarray(phi_mw, dtype=float)
    per_point = int(total_shots) // phi_mw.size
    rows = []
    for x in phi_mw:
        p_plus, p_minus = populations(phi, x)
        i_hat, se = simulate_readout(p_plus - p_minus, per_point, contrast, rng, p_sum=p_plus + p_minus)
        rows.append((x, i_hat, se))
    return np.array(rows)
