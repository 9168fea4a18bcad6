"""
Core numerical package.

Contains the leap model, characteristic roots, structured determinants,
absorbing and stationary analyses, dense and Monte Carlo oracles, and
report rendering.
"""
from .absorbing import (
    AbsorptionMethod,
    AbsorptionResult,
    absorption_probabilities,
    absorption_probability_at,
    analyze_absorption,
    expected_absorption_times,
    walk_closed_forms,
)
from .char_poly import (
    LocationReport,
    PolyCoeffs,
    Root,
    RootSet,
    char_poly,
    nonzero_roots,
    reverse_char_poly,
    root_location_counts,
    sorted_inverse_roots,
)
from .errors import IllConditioned, LeapError, LeapValidationError, NumericalToleranceError
from .leap_model import (
    Drift,
    LeapParams,
    StepProfile,
    drift_moments,
    load_params,
    mirror,
    roulette_params,
    step_profile,
    validate,
)
from .matrix_forms import (
    Determinant,
    StructuredMatrix,
    accordion_product,
    det_structured,
    extended_accordion_product,
    modified_accordion_product,
    omega_matrix,
    power_sum,
)
from .oracle import (
    ChainMode,
    OracleReport,
    build_transition_matrix,
    power_iteration_stationary,
    simulate,
    solve_absorption,
)
from .report_writer import ReportWriter
from .stationary import (
    Classification,
    StationaryResult,
    Verdict,
    classify,
    stationary_one_sided,
    stationary_two_sided,
    uniform_limit_check,
)

__all__ = [
    # Model
    "LeapParams",
    "StepProfile",
    "Drift",
    "validate",
    "step_profile",
    "drift_moments",
    "mirror",
    "roulette_params",
    "load_params",
    # Roots
    "PolyCoeffs",
    "Root",
    "RootSet",
    "LocationReport",
    "char_poly",
    "reverse_char_poly",
    "nonzero_roots",
    "sorted_inverse_roots",
    "root_location_counts",
    # Matrix forms
    "StructuredMatrix",
    "Determinant",
    "power_sum",
    "accordion_product",
    "extended_accordion_product",
    "modified_accordion_product",
    "omega_matrix",
    "det_structured",
    # Absorbing
    "AbsorptionMethod",
    "AbsorptionResult",
    "analyze_absorption",
    "absorption_probabilities",
    "expected_absorption_times",
    "absorption_probability_at",
    "walk_closed_forms",
    # Stationary
    "Verdict",
    "Classification",
    "StationaryResult",
    "classify",
    "stationary_two_sided",
    "stationary_one_sided",
    "uniform_limit_check",
    # Oracle
    "ChainMode",
    "OracleReport",
    "build_transition_matrix",
    "solve_absorption",
    "power_iteration_stationary",
    "simulate",
    # Errors
    "LeapError",
    "LeapValidationError",
    "NumericalToleranceError",
    "IllConditioned",
    # Reports
    "ReportWriter",
]
