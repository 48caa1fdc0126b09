"""Relativistic Doppler and velocity-composition laws, axiom checkers, and
recovery of the speed map and exponent from black-box laws."""

from .errors import (
    BisectionError,
    ConsistencyError,
    DomainError,
    FitError,
    HomogeneityError,
    ModelViolation,
    MonotonicityError,
    RelDopplerError,
)
from .kinematics import (
    ASTAR,
    AV,
    DE,
    LF,
    CompositionLaw,
    DopplerLaw,
    Exponent,
    SpeedFraction,
    Wavelength,
    doppler_de,
    doppler_general,
    doppler_star,
    dstar_law,
    general_composition_law,
    general_doppler_law,
    lorentz_fitzgerald,
    u_lf,
    u_lf_inverse,
    u_lf_map,
    velocity_add_av,
    velocity_add_general,
    velocity_add_perp,
)
from .monotone import MonotoneMap, random_monotone_map

__version__ = "0.1.0"
