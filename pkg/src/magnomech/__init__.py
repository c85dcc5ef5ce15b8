"""Cavity magnomechanics with two YIG spheres and an intracavity OPA.

Steady state, linearized probe response (closed-form and full-matrix
engines), output-field observables, and spectral feature extraction.
"""

from .errors import (ConvergenceError, FeatureExtractionWarning, GridError,
                     InvalidParameterError, MagnomechError, NearSingularError,
                     PhaseIllConditionedError, UnknownPathError)
from .linear_response import (BASIS, CONJUGATION_PERMUTATION, DriftMatrix,
                              FluctuationSolution, StabilityReport,
                              build_drift_matrix, c_minus_grid,
                              phonon_response, solve_fluctuations,
                              stability_check)
from .observables import (DEFAULT_STEP_FACTOR, GroupDelay, ResponseSpectrum,
                          SpectralFeatures, extract_features, fano_threshold,
                          group_delay, output_field, sweep_spectrum,
                          transmission, transmission_evaluator)
from .params import (R0_REFERENCE, Detunings, DetuningOverrides, DriveParams,
                     OpaParams, PhysicalConstants, SphereParams, SystemConfig,
                     ValidityEntry, ValidityReport, config_to_dict, detunings,
                     kerr_coefficient, load_config, numeric_paths,
                     probe_amplitude, rabi_frequency, set_config_path,
                     spin_count, validate_config)
from .response_closed import CoefficientLadder, build_ladder, c_minus_closed
from .steadystate import (EffectiveCouplings, SteadyState, coupling_products,
                          effective_couplings, iterate_once,
                          solve_steady_state)

__version__ = "0.1.0"

__all__ = [
    "BASIS",
    "CONJUGATION_PERMUTATION",
    "CoefficientLadder",
    "ConvergenceError",
    "DEFAULT_STEP_FACTOR",
    "Detunings",
    "DetuningOverrides",
    "DriftMatrix",
    "DriveParams",
    "EffectiveCouplings",
    "FeatureExtractionWarning",
    "FluctuationSolution",
    "GridError",
    "GroupDelay",
    "InvalidParameterError",
    "MagnomechError",
    "NearSingularError",
    "OpaParams",
    "PhaseIllConditionedError",
    "PhysicalConstants",
    "R0_REFERENCE",
    "ResponseSpectrum",
    "SpectralFeatures",
    "SphereParams",
    "StabilityReport",
    "SteadyState",
    "SystemConfig",
    "UnknownPathError",
    "ValidityEntry",
    "ValidityReport",
    "build_drift_matrix",
    "build_ladder",
    "c_minus_closed",
    "c_minus_grid",
    "config_to_dict",
    "coupling_products",
    "detunings",
    "effective_couplings",
    "extract_features",
    "fano_threshold",
    "group_delay",
    "iterate_once",
    "kerr_coefficient",
    "load_config",
    "numeric_paths",
    "output_field",
    "phonon_response",
    "probe_amplitude",
    "rabi_frequency",
    "set_config_path",
    "solve_fluctuations",
    "solve_steady_state",
    "spin_count",
    "stability_check",
    "sweep_spectrum",
    "transmission",
    "transmission_evaluator",
    "validate_config",
]
