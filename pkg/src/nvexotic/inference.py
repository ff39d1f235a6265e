"""Phase fitting, systematic budget, and coupling exclusion limits."""

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .exceptions import DegenerateConfigurationError, DomainError, UnidentifiableError
from .geometry import CouplingHypothesis, SourceGeometry
from .kinematics import VibrationModel
from .spin import SequenceConfig, accumulated_phase

NOMINAL_THETA = math.acos(1 / math.sqrt(3))


def mass_from_lambda(force_range, constants=DEFAULT_CONSTANTS):
    """Mediator rest energy ``hbar c / lambda`` in eV."""
    force_range = np.asarray(force_range, dtype=float)
    if np.any(~(force_range > 0)):
        raise DomainError("force range must be positive")
    out = constants.hbar_c / force_range
    return out if out.ndim else float(out)


def lambda_from_mass(mass_ev, constants=DEFAULT_CONSTANTS):
    """Force range in metres for a mediator rest energy in eV."""
    mass_ev = np.asarray(mass_ev, dtype=float)
    if np.any(~(mass_ev > 0)):
        raise DomainError("boson mass must be positive")
    out = constants.hbar_c / mass_ev
    return out if out.ndim else float(out)


def z_score(cl):
    """Two-sided Gaussian quantile, 1.96 at 95 % CL."""
    if not 0.5 < cl < 1:
        raise DomainError("confidence level must lie in (0.5, 1)")
    return float(norm.ppf(0.5 * (1 + cl)))


@dataclass(frozen=True)
class PhaseEstimate:
    phi_central: float
    sigma_stat: float

    def __post_init__(self):
        if not self.sigma_stat >= 0:
            raise DomainError("sigma_stat must be non-negative")


def _as_columns(data):
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise DomainError("data must have columns (phi_mw, I, sigma_I)")
    return arr[:, 0], arr[:, 1], arr[:, 2]


def fit_phase(data):
    """Weighted least-squares fit of ``I = -sin(phi_mw) sin(phi)``.

    Parameters
    ----------
    data : array_like, shape (n, 3)
        Rows of ``(phi_mw, I, sigma_I)``.

    Returns
    -------
    PhaseEstimate
        Best-fit phase and its 1-sigma error from the curvature of chi^2.
    """
    phi_mw, y, sigma = _as_columns(data)
    if phi_mw.size < 3:
        raise DomainError("need at least 3 points")
    if not np.all(np.isfinite(np.column_stack([phi_mw, y, sigma]))):
        raise DomainError("data contain non-finite values")
    if np.any(sigma <= 0):
        raise DomainError("sigma_I must be positive")
    x = -np.sin(phi_mw)
    w = sigma**-2
    sxx = np.sum(w * x * x)
    if sxx <= 1e-24 * np.sum(w):
        raise UnidentifiableError("all phi_mw are multiples of pi; phase is unidentifiable")
    # The model is linear in s = sin(phi).
    s = np.clip(np.sum(w * x * y) / sxx, -1.0, 1.0)
    phi = math.asin(s)
    resid = y - x * s
    curvature = np.sum(w * (x * x * math.cos(phi) ** 2 + resid * x * s))
    if not curvature > 0:
        raise UnidentifiableError("chi^2 has no curvature at the best fit")
    return PhaseEstimate(phi, float(1 / math.sqrt(curvature)))


@dataclass(frozen=True)
class Setup:
    """Everything that fixes the phase response to a given coupling."""

    geometry: SourceGeometry = SourceGeometry()
    vibration: VibrationModel = VibrationModel()
    theta: float = NOMINAL_THETA
    sequence: SequenceConfig = SequenceConfig()
    constants: PhysicalConstants = DEFAULT_CONSTANTS
    quad_tol: float = 1e-8
    samples_per_tau: int = 4096

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def transfer_factor(force_range, setup=Setup()):
    """Phase magnitude per unit coupling, ``|phi(g = 1)|`` in rad.

    The sign of the phase depends only on the velocity and sync conventions;
    bounds use the magnitude.
    """
    hyp = CouplingHypothesis(force_range, 1.0)
    res = accumulated_phase(
        hyp, setup.geometry, setup.vibration, setup.theta, setup.sequence,
        setup.constants, samples_per_tau=setup.samples_per_tau, tol=setup.quad_tol,
    )
    return abs(res.phi)


@dataclass(frozen=True)
class SystematicParameter:
    """One measured input of the budget.

    ``kind='symmetric'`` evaluates at ``nominal +/- sigma``. ``kind='shift'``
    is for an input that the analysis assumes equal to ``assumed`` while the
    measurement gives ``nominal +/- sigma``; both sides are compared against
    the assumed value.
    """

    name: str
    nominal: float
    sigma: float
    unit: str
    apply: object
    kind: str = "symmetric"
    assumed: float = None
    scale: float = 1.0

    def __post_init__(self):
        if self.sigma < 0:
            raise DomainError(f"{self.name}: sigma must be non-negative")
        if self.kind not in ("symmetric", "shift"):
            raise DomainError(f"{self.name}: unknown kind {self.kind!r}")

    @property
    def reference(self):
        return self.assumed if self.kind == "shift" else self.nominal


@dataclass(frozen=True)
class SystematicEntry:
    name: str
    nominal: float
    uncertainty: float
    unit: str
    correction_central: float
    correction_sigma: float


def _set_theta(setup, value):
    return setup.replace(theta=value)


def _set_d0(setup, value):
    return setup.replace(vibration=dataclasses.replace(setup.vibration, d0=value))


def _set_diameter(setup, value):
    # The lens keeps its shape: thickness scales with the radius.
    geo = setup.geometry
    ratio = geo.thickness / geo.radius
    return setup.replace(geometry=geo.replace(radius=0.5 * value, thickness=0.5 * value * ratio))


def _set_thickness(setup, value):
    return setup.replace(geometry=setup.geometry.replace(thickness=value))


def _set_amplitude(setup, value):
    return setup.replace(vibration=dataclasses.replace(setup.vibration, amplitude=value))


def _set_offset(setup, value):
    return setup.replace(geometry=setup.geometry.replace(lateral_offset=(value, 0.0)))


def measured_parameters(setup=Setup(), theta_sigma=math.radians(0.6), d0_sigma=0.1e-6,
                      diameter_sigma=2.5e-6, thickness_sigma=35e-6, amplitude_sigma=0.1e-9,
                      xy_offset=1.3e-6, xy_offset_sigma=0.8e-6):
    """The six measured inputs of the budget, centred on ``setup``."""
    geo, vib = setup.geometry, setup.vibration
    return [
        SystematicParameter("theta", setup.theta, theta_sigma, "deg", _set_theta, scale=180 / math.pi),
        SystematicParameter("distance", vib.d0, d0_sigma, "um", _set_d0, scale=1e6),
        SystematicParameter("diameter", 2 * geo.radius, diameter_sigma, "um", _set_diameter, scale=1e6),
        SystematicParameter("thickness", geo.thickness, thickness_sigma, "um", _set_thickness, scale=1e6),
        SystematicParameter("amplitude", vib.amplitude, amplitude_sigma, "nm", _set_amplitude, scale=1e9),
        SystematicParameter("xy_deviation", xy_offset, xy_offset_sigma, "um", _set_offset,
                            kind="shift", assumed=geo.offset, scale=1e6),
    ]


@dataclass(frozen=True)
class Budget:
    rows: list
    total: SystematicEntry


def _combine(rows):
    central = math.fsum(r.correction_central for r in rows)
    sigma = math.sqrt(math.fsum(r.correction_sigma**2 for r in rows))
    return SystematicEntry("total", float("nan"), float("nan"), "", central, sigma)


def reference_phase(est, cl, reference="limit"):
    """Phase whose coupling the systematic shifts are measured against.

    ``'limit'`` uses the statistical upper limit ``|phi| + z sigma`` carrying
    the sign of the central value; ``'central'`` uses the central phase.
    """
    if reference == "central":
        return est.phi_central
    if reference == "limit":
        sign = -1.0 if est.phi_central < 0 else 1.0
        return sign * (abs(est.phi_central) + z_score(cl) * est.sigma_stat)
    raise DomainError(f"unknown reference {reference!r}")


def systematic_budget(force_range, setup, params, est, cl=0.95, reference="limit", k_nominal=None):
    """Per-parameter corrections to the coupling and their combination.

    For every parameter the coupling ``g(p) = phi_ref / K(p)`` is evaluated at
    both ends of the parameter's range and compared with ``g`` at the
    reference value. The row's central correction is the mean of the two
    shifts and its uncertainty half their difference. Rows add linearly in
    the central value and in quadrature in the uncertainty.
    """
    k0 = transfer_factor(force_range, setup) if k_nominal is None else k_nominal
    if k0 == 0:
        raise DegenerateConfigurationError("transfer factor vanishes at the nominal configuration")
    phi_ref = reference_phase(est, cl, reference)
    rows = []
    for p in params:
        if p.sigma == 0 and p.nominal == p.reference:
            shifts = (0.0, 0.0)
        else:
            k_ref = k0 if p.reference == p.nominal and p.kind == "symmetric" else \
                transfer_factor(force_range, p.apply(setup, p.reference))
            g_ref = phi_ref / k_ref
            shifts = tuple(
                phi_ref / transfer_factor(force_range, p.apply(setup, p.nominal + side * p.sigma)) - g_ref
                for side in (1, -1)
            )
        rows.append(SystematicEntry(
            p.name, p.nominal * p.scale, p.sigma * p.scale, p.unit,
            0.5 * (shifts[0] + shifts[1]), 0.5 * abs(shifts[0] - shifts[1]),
        ))
    return Budget(rows, _combine(rows))


def exclusion_limit(est, total, k, cl=0.95):
    """Upper bound on ``|g|``: ``|g_central| + z(cl) * sigma_total``."""
    if not k > 0:
        raise DomainError("transfer factor must be positive")
    z = z_score(cl)
    g_central = est.phi_central / k + total.correction_central
    sigma = math.hypot(est.sigma_stat / k, total.correction_sigma)
    return abs(g_central) + z * sigma


@dataclass(frozen=True)
class ExclusionPoint:
    force_range: float
    mass_ev: float
    g_limit: float
    transfer_factor: float
    budget: Budget


def exclusion_point(force_range, est, setup=Setup(), params=None, cl=0.95, reference="limit"):
    """Transfer factor, budget, and bound at one force range."""
    params = measured_parameters(setup) if params is None else params
    k = transfer_factor(force_range, setup)
    if k == 0:
        raise DegenerateConfigurationError(f"transfer factor vanishes at lambda={force_range:g} m")
    budget = systematic_budget(force_range, setup, params, est, cl, reference, k_nominal=k)
    return ExclusionPoint(
        force_range, mass_from_lambda(force_range, setup.constants),
        exclusion_limit(est, budget.total, k, cl), k, budget,
    )


def _point_star(args):
    return exclusion_point(*args)


def exclusion_curve(force_ranges, est, setup=Setup(), params=None, cl=0.95, reference="limit", n_jobs=1):
    """Exclusion points over a grid of force ranges, in grid order."""
    force_ranges = np.atleast_1d(np.asarray(force_ranges, dtype=float))
    if np.any(force_ranges < 1e-7) or np.any(force_ranges > 1e-2):
        raise DomainError("force ranges must lie in [0.1 um, 10 mm]")
    jobs = [(lam, est, setup, params, cl, reference) for lam in force_ranges]
    if n_jobs == 1 or len(jobs) == 1:
        return [_point_star(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_point_star, jobs))
