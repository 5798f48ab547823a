"""Entropy function and pressure of the boundary-driven TASEP stationary state.

Closed forms live in :mod:`closed_forms`; everything else in the package is an
independent way of computing the same objects, used to check them.
"""

from .closed_forms import (
    EnergyBand,
    MaximizerFamily,
    Phase,
    PhaseInfo,
    Regime,
    classify,
    energy_band,
    entropy,
    entropy_minus,
    entropy_plus,
    gaussian_variance,
    gibbs_shannon,
    maximizer,
    predicted_bulk_density,
    pressure,
    pressure_minus,
    pressure_plus,
    rate_function,
    stationary_profile,
)
from .core import NEG_INF
from .matrix_product import (
    ExactMeasure,
    finite_pressure,
    gibbs_shannon_exact,
    lemma_sign_check,
    local_eq_diagnostic,
    master_equation_stationary,
    stationary_measure,
    y_spectrum,
)
from .params import DegenerateParameterError, Direction, DomainError, Params, Profile, ResourceError
from .simulator import SimConfig, SimResult, phase_sweep, simulate
from .variational import (
    legendre,
    oracle_energy_band,
    oracle_entropy_minus,
    oracle_entropy_plus,
    quasipotential,
)

__version__ = "0.1.0"

__all__ = [
    "NEG_INF",
    "DegenerateParameterError",
    "Direction",
    "DomainError",
    "EnergyBand",
    "ExactMeasure",
    "MaximizerFamily",
    "Params",
    "Phase",
    "PhaseInfo",
    "Profile",
    "Regime",
    "ResourceError",
    "SimConfig",
    "SimResult",
    "classify",
    "energy_band",
    "entropy",
    "entropy_minus",
    "entropy_plus",
    "finite_pressure",
    "gaussian_variance",
    "gibbs_shannon",
    "gibbs_shannon_exact",
    "legendre",
    "lemma_sign_check",
    "local_eq_diagnostic",
    "master_equation_stationary",
    "maximizer",
    "oracle_energy_band",
    "oracle_entropy_minus",
    "oracle_entropy_plus",
    "phase_sweep",
    "predicted_bulk_density",
    "pressure",
    "pressure_minus",
    "pressure_plus",
    "quasipotential",
    "rate_function",
    "simulate",
    "stationary_measure",
    "stationary_profile",
    "y_spectrum",
]
