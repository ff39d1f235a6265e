"""Nucleon source geometry and the exotic-interaction effective field.

The source is a spherical lens of radius ``R`` whose curved face points at the
sensor. The sensor sits at the origin, the lens sphere is centred at height
``d + R`` and the solid is clipped to heights ``[d, d + thickness]``. A
thickness equal to ``R`` is the exact half sphere.

Three evaluators of the volume integral

    f(lambda, geometry, d) = rho * integral_V exp(-r / lambda) / r dV

are provided:

* :func:`f_closed_form`, the analytic half-sphere result (on axis only);
* :func:`f_on_axis`, a fast one-dimensional reduction valid for any on-axis
  lens thickness;
* :func:`f_quadrature`, adaptive volumetric quadrature used as the
  independent oracle and as the only evaluator for laterally offset sensors.
"""

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .constants import DEFAULT_CONSTANTS
from .exceptions import ConvergenceError, DomainError, PreconditionError

_REL_EQ = 1e-12


@dataclass(frozen=True)
class SourceGeometry:
    """Spherical-lens nucleon source.

    Parameters
    ----------
    radius : float
        Sphere radius R in metres.
    thickness : float, optional
        Centre thickness of the lens in metres, measured from the curved
        vertex. Defaults to ``radius`` (half sphere). Values up to ``2 * radius``
        are accepted so that thickness scans can straddle the half sphere.
    number_density : float
        Nucleon number density in m^-3.
    lateral_offset : tuple of float
        Sensor displacement (x, y) from the lens symmetry axis in metres.
    """

    radius: float = 250e-6
    thickness: float = None
    number_density: float = 1.33e30
    lateral_offset: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.thickness is None:
            object.__setattr__(self, "thickness", self.radius)
        object.__setattr__(self, "lateral_offset", tuple(float(v) for v in self.lateral_offset))
        if not self.radius > 0:
            raise DomainError("radius must be positive")
        if not 0 < self.thickness <= 2 * self.radius:
            raise DomainError("thickness must lie in (0, 2 * radius]")
        if not self.number_density >= 0:
            raise DomainError("number_density must be non-negative")
        if len(self.lateral_offset) != 2:
            raise DomainError("lateral_offset must be a 2-vector")

    @property
    def offset(self):
        """Magnitude of the lateral offset in metres."""
        return math.hypot(*self.lateral_offset)

    @property
    def is_half_sphere(self):
        return abs(self.thickness - self.radius) <= _REL_EQ * self.radius

    @property
    def on_axis(self):
        return self.offset == 0.0

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class CouplingHypothesis:
    """Force range (m) and dimensionless coupling product g_A^e g_V^N."""

    force_range: float
    g_product: float = 1.0

    def __post_init__(self):
        if not self.force_range > 0:
            raise DomainError("force_range must be positive")

    @property
    def boson_mass(self):
        """Mediator mass m_b = hbar / (lambda c) in kg."""
        return DEFAULT_CONSTANTS.hbar / (self.force_range * DEFAULT_CONSTANTS.c)

    @classmethod
    def from_boson_mass(cls, mass_kg, g_product=1.0):
        if not mass_kg > 0:
            raise DomainError("boson mass must be positive")
        return cls(DEFAULT_CONSTANTS.hbar / (mass_kg * DEFAULT_CONSTANTS.c), g_product)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float


def point_kernel(r, force_range):
    """Screened Yukawa kernel ``exp(-r / lambda) / r`` in m^-1."""
    r = np.asarray(r, dtype=float)
    if not force_range > 0:
        raise DomainError("force_range must be positive")
    if np.any(r <= 0):
        raise DomainError("distance must be positive")
    out = np.exp(-r / force_range) / r
    return out if out.ndim else float(out)


def _check_distance(d):
    d = np.asarray(d, dtype=float)
    if np.any(~(d > 0)):
        raise DomainError("distance d must be positive")
    return d


def f_closed_form(force_range, geometry, d):
    """Analytic volume integral for the on-axis half sphere.

    Vectorised over ``d``. Raises :class:`PreconditionError` for truncated
    lenses or a laterally displaced sensor; use :func:`f_quadrature` or
    :func:`f_on_axis` there.
    """
    if not geometry.is_half_sphere or not geometry.on_axis:
        raise PreconditionError(
            "closed form holds only for the on-axis half sphere; use f_quadrature"
        )
    if not force_range > 0:
        raise DomainError("force_range must be positive")
    d = _check_distance(d)
    lam = force_range
    R = geometry.radius
    near = d + R
    rim = np.sqrt(R**2 + near**2)
    bracket = (
        -np.exp(-near / lam)
        + np.exp(-d / lam)
        + (rim + lam) / near * np.exp(-rim / lam)
        - (d + lam) / near * np.exp(-d / lam)
    )
    out = 2 * np.pi * geometry.number_density * lam**2 * bracket
    return out if out.ndim else float(out)


def _disc_radius(z, d, R):
    # Radius of the lens cross-section at height z.
    h = z - (d + R)
    return math.sqrt(max(R * R - h * h, 0.0))


def _breakpoints(lo, hi, anchors):
    return sorted({p for p in anchors if lo < p < hi}) or None


def _quad(func, lo, hi, epsrel, points=None, limit=400):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            return integrate.quad(func, lo, hi, epsabs=0.0, epsrel=epsrel, limit=limit, points=points)
        except integrate.IntegrationWarning as exc:
            raise ConvergenceError(str(exc), diagnostics={"interval": (lo, hi)}) from None


def f_on_axis(force_range, geometry, d, tol=1e-10):
    """On-axis volume integral for any lens thickness.

    The transverse integral over each horizontal disc is done analytically,
    leaving a one-dimensional adaptive integral over height.
    """
    if not geometry.on_axis:
        raise PreconditionError("f_on_axis needs an on-axis sensor")
    if not force_range > 0:
        raise DomainError("force_range must be positive")
    d_arr = _check_distance(d)
    lam = force_range
    R = geometry.radius
    top = min(geometry.thickness, lam * (math.log(1 / tol) + 21))

    def one(dist):
        def slab(u):
            z = dist + u
            s = _disc_radius(z, dist, R)
            return np.exp(-z / lam) - np.exp(-math.hypot(z, s) / lam)

        pts = _breakpoints(0.0, top, [lam, 5 * lam, 25 * lam, dist, R])
        val, _ = _quad(slab, 0.0, top, tol, pts)
        return 2 * np.pi * geometry.number_density * lam * val

    out = np.vectorize(one, otypes=[float])(d_arr)
    return out if out.ndim else float(out)


_GL8 = np.polynomial.legendre.leggauss(8)


def _ring_integral(z, s_max, off, lam, eps, max_refine=8):
    # Integral over one lens cross-section of exp(-r/lam)/r in polar
    # coordinates about the lens axis, divided by 2 pi. Gauss-Legendre panels
    # in radius and the trapezoid rule in azimuth (periodic integrand); both
    # are refined together until successive estimates agree.
    anchors = [off, lam, 5 * lam]
    step = z
    while step < s_max:
        anchors += [off - step, off + step]
        step *= 2
    edges = np.array([0.0] + sorted({a for a in anchors if 0 < a < s_max}) + [s_max])
    n_phi = 17
    prev = None
    for _ in range(max_refine):
        lo, hi = edges[:-1, None], edges[1:, None]
        half = 0.5 * (hi - lo)
        s = (0.5 * (hi + lo) + half * _GL8[0]).ravel()
        w = (half * _GL8[1]).ravel()
        phi = np.linspace(0.0, np.pi, n_phi)
        wphi = np.full(n_phi, np.pi / (n_phi - 1))
        wphi[[0, -1]] *= 0.5
        r = np.sqrt(s[:, None] ** 2 + off * off - 2 * off * s[:, None] * np.cos(phi) + z * z)
        # Screening factor exp(-z/lam) is pulled out to keep the
        # convergence test meaningful when the integrand underflows.
        inner = (np.exp(-(r - z) / lam) / r) @ wphi
        est = np.dot(w, s * inner) / np.pi
        if prev is not None and abs(est - prev) <= eps * abs(est):
            return est * math.exp(-z / lam)
        prev = est
        edges = np.sort(np.concatenate([edges, 0.5 * (edges[:-1] + edges[1:])]))
        n_phi = 2 * n_phi - 1
    raise ConvergenceError("cross-section integral did not converge", estimate=prev)


def f_quadrature(force_range, geometry, d, tol=1e-7):
    """Volume integral by error-controlled adaptive quadrature.

    On-axis sensors use an axisymmetric (height x radius) double integral;
    laterally displaced sensors add an azimuthal integral. The kernel is never
    integrated analytically here, so the result is an independent check on
    the other evaluators.

    Returns
    -------
    QuadratureResult
        ``value`` in m^-1 and an absolute ``error`` estimate.
    """
    # scipy's quad cannot resolve relative errors much below 1e-13.
    if not 1e-12 <= tol <= 1e-2:
        raise DomainError("tol must lie in [1e-12, 1e-2]")
    if not force_range > 0:
        raise DomainError("force_range must be positive")
    dist = float(_check_distance(d))
    rho = geometry.number_density
    if rho == 0:
        return QuadratureResult(0.0, 0.0)
    lam = force_range
    R = geometry.radius
    off = geometry.offset
    eps = 0.1 * tol
    # Beyond this height the screened integrand is below eps * 1e-9 of its peak.
    top = dist + min(geometry.thickness, lam * (math.log(1 / eps) + 21))

    if off == 0.0:

        def disc(z):
            s_max = _disc_radius(z, dist, R)
            if s_max == 0.0:
                return 0.0

            def radial(s):
                r = math.hypot(s, z)
                return math.exp(-r / lam) / r * s

            pts = _breakpoints(0.0, s_max, [lam, 5 * lam, z, 5 * z])
            return _quad(radial, 0.0, s_max, eps, pts)[0]

    else:

        def disc(z):
            s_max = _disc_radius(z, dist, R)
            if s_max == 0.0:
                return 0.0
            return _ring_integral(z, s_max, off, lam, eps)

    pts = _breakpoints(dist, top, [dist + k for k in (dist, 5 * dist, lam, 5 * lam, 25 * lam)])
    try:
        val, err = _quad(disc, dist, top, eps, pts)
    except ConvergenceError as exc:
        raise ConvergenceError(
            "volume quadrature did not converge",
            estimate=exc.estimate,
            error=exc.error,
            diagnostics={"force_range": lam, "d": dist, "offset": off},
        ) from None
    scale = 2 * np.pi * rho
    return QuadratureResult(scale * val, scale * (err + eps * abs(val)))


def f_value(force_range, geometry, d, tol=1e-9):
    """Evaluate f with the cheapest evaluator valid for ``geometry``."""
    if geometry.on_axis:
        if geometry.is_half_sphere:
            return f_closed_form(force_range, geometry, d)
        return f_on_axis(force_range, geometry, d, tol=tol)
    d_arr = np.asarray(d, dtype=float)
    out = np.vectorize(lambda x: f_quadrature(force_range, geometry, x, tol).value, otypes=[float])(d_arr)
    return out if out.ndim else float(out)


def f_profile(force_range, geometry, d_min, d_max, tol=1e-9, degree=5):
    """Return a vectorised callable ``d -> f`` valid on ``[d_min, d_max]``.

    The closed form is used directly when it applies. Otherwise ``log f`` is
    interpolated on Chebyshev nodes, which keeps the number of expensive
    quadratures per time trace small.
    """
    if geometry.on_axis and geometry.is_half_sphere:
        return lambda d: f_closed_form(force_range, geometry, d)
    if geometry.number_density == 0:
        return lambda d: np.zeros_like(np.asarray(d, dtype=float))
    if d_max - d_min <= 1e-15 * d_max:
        const = f_value(force_range, geometry, d_min, tol)
        return lambda d: np.full_like(np.asarray(d, dtype=float), const)
    cheb = np.polynomial.Chebyshev.interpolate(
        lambda x: np.log(f_value(force_range, geometry, x, tol)), degree, domain=[d_min, d_max]
    )
    return lambda d: np.exp(cheb(np.asarray(d, dtype=float)))


def effective_field(hyp, geometry, d, v, theta, constants=DEFAULT_CONSTANTS, tol=1e-9):
    """Exotic effective field along the NV axis in tesla.

    ``v`` is the signed source speed (m/s) and ``theta`` the angle between the
    velocity and the NV axis. Vectorised over ``d`` and ``v``.
    """
    f = f_value(hyp.force_range, geometry, d, tol)
    return hyp.g_product / (2 * np.pi * constants.gamma_e) * f * np.asarray(v) * np.cos(theta)
