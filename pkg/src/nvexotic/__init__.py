"""Simulation and analysis of NV-centre searches for a spin- and velocity-dependent
electron-nucleon interaction sourced by a vibrating lens."""

__version__ = "0.1.0"

from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .estimators import CouplingLimitEstimator, PhaseFitter
from .geometry import (
    CouplingHypothesis,
    SourceGeometry,
    effective_field,
    f_closed_form,
    f_on_axis,
    f_quadrature,
    point_kernel,
)
from .inference import (
    PhaseEstimate,
    Setup,
    exclusion_curve,
    exclusion_limit,
    fit_phase,
    lambda_from_mass,
    mass_from_lambda,
    systematic_budget,
    measured_parameters,
    transfer_factor,
)
from .kinematics import FieldTrace, Parity, VibrationModel, beff_trace, distance_at, velocity_at
from .spin import (
    SequenceConfig,
    Variant,
    accumulated_phase,
    echo_response,
    populations,
    simulate_readout,
    synthetic_dataset,
    time_domain_phase,
)
