"""Spectral theory and dispersive decay for periodic Jacobi operators.

The pipeline: coefficients -> monodromy matrix -> band structure and gap
eigenvalues -> spectral measure and orthogonal polynomials -> continuous-
spectrum evolution exp(-itJ) P_c by band-wise quadrature (with an
independent Chebyshev-truncation oracle) -> measured decay exponents
checked against the rates predicted by a stationary-point audit.
"""

from .decay import (
    DecayExperiment,
    DecayReport,
    FitResult,
    decay_experiment,
    fit_exponent,
    geometric_times,
    norm_series,
    state_norm,
)
from .errors import (
    DerivativeSingularity,
    DivergentNormSum,
    EigenvalueInBand,
    EmptyCoefficients,
    InsufficientPoints,
    LengthMismatch,
    NonPositiveHopping,
    NonPositiveNorm,
    OutsideBandInterior,
    OutsideSpectrum,
    QuadratureBudgetExceeded,
    RangeTooSmall,
    RootCountMismatch,
    SpecbandError,
    TruncationTooLarge,
)
from .measure import (
    SpectralData,
    SpectralMeasure,
    gram_matrix,
    moment,
    moment_oracle,
    point_mass,
    spectral_data,
    spectral_measure,
)
from .operators import (
    FiniteState,
    JacobiOperator,
    apply,
    config_dict,
    config_hash,
    load_operator,
    new_operator,
    norm_bound,
    tridiag_bands,
    truncate,
)
from .polynomials import poly_closed_form, poly_recurrence, rho
from .propagator import (
    EvolutionResult,
    StateSnapshot,
    bound_state_vector,
    evolve_grid,
    evolve_oracle,
    evolve_spectral,
    parallel_map,
    project_continuous,
)
from .spectrum import (
    AuditReport,
    BandAudit,
    BandStructure,
    EigenvalueInfo,
    PhaseFunction,
    band_structure,
    phase_function,
    point_spectrum,
    stationary_audit,
    theta,
)
from .transfer import (
    MonodromyData,
    monodromy,
    power_via_rho,
    rho_sequence,
    step_matrix,
    transfer_entries,
    transfer_matrix,
)
from .validation import CheckResult, format_table, validation_suite

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
