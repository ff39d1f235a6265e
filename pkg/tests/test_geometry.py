import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nvexotic import CouplingHypothesis, PhysicalConstants, SourceGeometry, effective_field
from nvexotic.exceptions import DomainError, PreconditionError
from nvexotic.geometry import f_closed_form, f_on_axis, f_profile, f_quadrature, f_value, point_kernel

from conftest import B_NOMINAL_G1, F_NOMINAL, LAM_200, THETA


def test_constants_consistent():
    c = PhysicalConstants()
    assert c.hbar > 0 and c.c > 0 and c.gamma_e > 0
    assert c.hbar_c == pytest.approx(c.hbar * c.c / 1.602176634e-19, rel=1e-9)
    assert c.hbar_c == pytest.approx(197.327e-9, rel=1e-5)
    with pytest.raises(ValueError):
        PhysicalConstants(gamma_e=0.0)


def test_point_kernel_at_range():
    assert point_kernel(LAM_200, LAM_200) == pytest.approx(math.exp(-1) / LAM_200, rel=1e-15)


def test_point_kernel_extended_precision():
    mpmath.mp.dps = 40
    exact = mpmath.e ** (-mpmath.mpf(1) / 200) / mpmath.mpf("1e-6")
    assert point_kernel(1e-6, 200e-6) == pytest.approx(float(exact), rel=1e-14)


def test_point_kernel_screened_and_decreasing():
    r = np.geomspace(1e-9, 1.0, 200)
    k = point_kernel(r, 1e-5)
    assert np.all(k >= 0) and np.all(np.diff(k) <= 0)
    assert point_kernel(1.0, 1e-5) == 0.0


@pytest.mark.parametrize("r, lam", [(0.0, 1e-6), (-1e-6, 1e-6), (1e-6, 0.0)])
def test_point_kernel_domain(r, lam):
    with pytest.raises(DomainError):
        point_kernel(r, lam)


def test_closed_form_nominal(geometry):
    assert f_closed_form(LAM_200, geometry, 2e-6) == pytest.approx(F_NOMINAL, rel=1e-13)


def test_closed_form_empty_source():
    assert f_closed_form(LAM_200, SourceGeometry(number_density=0.0), 2e-6) == 0.0


def test_closed_form_vanishes_for_short_range(geometry):
    assert f_closed_form(1e-9, geometry, 2e-6) == 0.0


def test_closed_form_decreasing_in_distance(geometry):
    d = np.geomspace(1e-7, 1e-3, 300)
    f = f_closed_form(LAM_200, geometry, d)
    assert np.all(f > 0) and np.all(np.diff(f) < 0)


@pytest.mark.parametrize("change", [{"thickness": 200e-6}, {"lateral_offset": (1e-6, 0.0)}])
def test_closed_form_rejects_other_solids(geometry, change):
    with pytest.raises(PreconditionError, match="f_quadrature"):
        f_closed_form(LAM_200, geometry.replace(**change), 2e-6)


def test_geometry_validation():
    with pytest.raises(DomainError):
        SourceGeometry(radius=0.0)
    with pytest.raises(DomainError):
        SourceGeometry(thickness=600e-6)
    with pytest.raises(DomainError):
        SourceGeometry(number_density=-1.0)
    assert SourceGeometry().thickness == SourceGeometry().radius


def test_boson_mass_round_trip():
    hyp = CouplingHypothesis(LAM_200)
    back = CouplingHypothesis.from_boson_mass(hyp.boson_mass)
    assert back.force_range == pytest.approx(LAM_200, rel=1e-12)
    with pytest.raises(DomainError):
        CouplingHypothesis(0.0)


@pytest.mark.parametrize("lam", [1e-6, 2e-5, LAM_200, 1e-3])
@pytest.mark.parametrize("d", [1e-6, 2e-6, 30e-6, 100e-6])
def test_quadrature_matches_closed_form(geometry, lam, d):
    res = f_quadrature(lam, geometry, d, tol=1e-7)
    exact = f_closed_form(lam, geometry, d)
    assert abs(res.value - exact) <= 1e-6 * exact
    assert res.error >= 0


def test_quadrature_offset_effect_small(geometry):
    on = f_quadrature(LAM_200, geometry, 2e-6).value
    off = f_quadrature(LAM_200, geometry.replace(lateral_offset=(1.3e-6, 0.0)), 2e-6).value
    rel = (on - off) / on
    assert 0 < rel < 1e-3


def test_quadrature_offset_direction_irrelevant(geometry):
    a = f_quadrature(LAM_200, geometry.replace(lateral_offset=(1.3e-6, 0.0)), 2e-6).value
    b = f_quadrature(LAM_200, geometry.replace(lateral_offset=(0.0, -1.3e-6)), 2e-6).value
    assert a == pytest.approx(b, rel=1e-12)


def test_quadrature_offset_continuous_at_axis(geometry):
    # A vanishing offset goes through the azimuthal path but must agree with the axis.
    tiny = f_quadrature(20e-6, geometry.replace(lateral_offset=(1e-12, 0.0)), 2e-6, tol=1e-8).value
    assert tiny == pytest.approx(f_closed_form(20e-6, geometry, 2e-6), rel=1e-8)


def test_quadrature_validates_tolerance(geometry):
    with pytest.raises(DomainError):
        f_quadrature(LAM_200, geometry, 2e-6, tol=0.1)


@pytest.mark.parametrize("thickness", [50e-6, 215e-6, 285e-6, 480e-6])
@pytest.mark.parametrize("lam", [5e-6, LAM_200])
def test_on_axis_reduction_matches_quadrature(geometry, thickness, lam):
    geo = geometry.replace(thickness=thickness)
    assert f_on_axis(lam, geo, 2e-6) == pytest.approx(f_quadrature(lam, geo, 2e-6, tol=1e-8).value, rel=1e-8)


def test_f_increasing_in_thickness(geometry):
    t = np.linspace(20e-6, 500e-6, 25)
    f = [f_on_axis(LAM_200, geometry.replace(thickness=x), 2e-6) for x in t]
    assert np.all(np.diff(f) > 0)


def test_profile_interpolation_accuracy(geometry):
    for geo in (geometry.replace(thickness=285e-6), geometry.replace(lateral_offset=(2.1e-6, 0.0))):
        for lam in (1e-7, LAM_200):
            prof = f_profile(lam, geo, 2e-6, 2.3304e-6, tol=1e-9)
            for d in (2.05e-6, 2.2e-6, 2.33e-6):
                assert prof(d) == pytest.approx(f_value(lam, geo, d, tol=1e-9), rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(
    R_over_lam=st.floats(0.5, 50.0),
    d_over_lam=st.floats(0.01, 5.0),
    scale=st.floats(1e-3, 1e3),
)
def test_shape_function_depends_on_ratios_only(R_over_lam, d_over_lam, scale):
    lam = 50e-6
    base = SourceGeometry(radius=R_over_lam * lam)
    scaled = SourceGeometry(radius=R_over_lam * lam * scale)
    a = f_closed_form(lam, base, d_over_lam * lam) / lam**2
    b = f_closed_form(lam * scale, scaled, d_over_lam * lam * scale) / (lam * scale) ** 2
    assert b == pytest.approx(a, rel=1e-9)


def test_effective_field_nominal(geometry, vibration):
    hyp = CouplingHypothesis(LAM_200, 1.0)
    b = effective_field(hyp, geometry, 2e-6, vibration.peak_speed, THETA)
    assert vibration.peak_speed == pytest.approx(7.73e-2, rel=1e-3)
    assert b == pytest.approx(B_NOMINAL_G1, rel=1e-12)


def test_effective_field_zeros(geometry):
    hyp = CouplingHypothesis(LAM_200, 1.0)
    assert effective_field(hyp, geometry, 2e-6, 0.0, THETA) == 0.0
    assert abs(effective_field(hyp, geometry, 2e-6, 0.1, math.pi / 2)) < 1e-6 * B_NOMINAL_G1
    assert effective_field(CouplingHypothesis(LAM_200, 0.0), geometry, 2e-6, 0.1, THETA) == 0.0


@settings(max_examples=40, deadline=None)
@given(g=st.floats(-1e-15, 1e-15), v=st.floats(-1.0, 1.0))
def test_effective_field_linear_and_odd(g, v):
    geo = SourceGeometry()
    unit = effective_field(CouplingHypothesis(LAM_200, 1.0), geo, 2e-6, 1.0, THETA)
    b = effective_field(CouplingHypothesis(LAM_200, g), geo, 2e-6, v, THETA)
    assert b == pytest.approx(g * v * unit, rel=1e-12, abs=1e-300)
    assert effective_field(CouplingHypothesis(LAM_200, g), geo, 2e-6, -v, THETA) == pytest.approx(-b, rel=1e-15, abs=1e-300)
