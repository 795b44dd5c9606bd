"""Radiative properties of porous media via renewal theory.

The package is layered: ``distributions``/``walks`` implement the renewal
walk itself, ``cramer_lundberg`` the exact transform machinery built on
its adjustment roots, ``reflectivity`` the closed-form estimators, the
``simulate1d``/``bed``/``tracer`` trio the Monte Carlo reference
simulations, ``fitting`` the free-path law recovery, and ``validation``
the self-checking acceptance suite. ``cli`` exposes all of it as the
``porousrad`` command.
"""

from .bed import (
    BedGeometry,
    BedSpec,
    acceleration_grid,
    build_bed,
    coverage_fraction,
    load_bed,
    save_bed,
)
from .cramer_lundberg import (
    ALPHA_ONE_SHIFT,
    CramerLundbergSolution,
    NumericalError,
    cramer_lundberg_roots,
    discounted_overshoot_mean,
    mgf_one_sided,
    one_sided_coefficients,
    two_sided_coefficients,
    two_sided_exit_probability,
    two_sided_mgf,
    two_sided_overshoot_means,
)
from .distributions import StepDistribution, exponential, hyperexponential, sample_step
from .fitting import (
    DEFAULT_BINS,
    ExpFit,
    FitError,
    fit_free_paths,
    fit_least_squares,
    fit_mle,
    ks_statistic,
)
from .reflectivity import (
    EstimateResult,
    MediumParams,
    ValidityError,
    delta_correction,
    estimate,
    near_field_validity,
    rho_hat_exponential,
    rho_hat_general,
    rho_two_sided,
    rho_two_sided_from_overshoots,
    rho_upper_exponential,
)
from .simulate1d import (
    TallyResult,
    one_sided_record,
    simulate_1d_one_sided,
    simulate_1d_two_sided,
)
from .tracer import (
    EmissionModel,
    FluxProfile,
    Simulation2D,
    TraceRecord,
    simulate_2d,
    trace_ray,
)
from .validation import ValidationReport, run_all
from .walks import (
    DEFAULT_MAX_STEPS,
    ExitSide,
    OneSided,
    TwoSided,
    WalkBatch,
    WalkConfig,
    WalkOutcome,
    empirical_mgf,
    sample_walk,
    sample_walk_batch,
)

__version__ = "0.1.0"

__all__ = [
    "ALPHA_ONE_SHIFT",
    "BedGeometry",
    "BedSpec",
    "CramerLundbergSolution",
    "DEFAULT_BINS",
    "DEFAULT_MAX_STEPS",
    "EmissionModel",
    "EstimateResult",
    "ExitSide",
    "ExpFit",
    "FitError",
    "FluxProfile",
    "MediumParams",
    "NumericalError",
    "OneSided",
    "Simulation2D",
    "StepDistribution",
    "TallyResult",
    "TraceRecord",
    "TwoSided",
    "ValidationReport",
    "ValidityError",
    "WalkBatch",
    "WalkConfig",
    "WalkOutcome",
    "acceleration_grid",
    "build_bed",
    "coverage_fraction",
    "cramer_lundberg_roots",
    "delta_correction",
    "discounted_overshoot_mean",
    "empirical_mgf",
    "estimate",
    "exponential",
    "fit_free_paths",
    "fit_least_squares",
    "fit_mle",
    "hyperexponential",
    "ks_statistic",
    "load_bed",
    "mgf_one_sided",
    "near_field_validity",
    "one_sided_coefficients",
    "one_sided_record",
    "rho_hat_exponential",
    "rho_hat_general",
    "rho_two_sided",
    "rho_two_sided_from_overshoots",
    "rho_upper_exponential",
    "sample_step",
    "sample_walk",
    "sample_walk_batch",
    "save_bed",
    "simulate_1d_one_sided",
    "simulate_1d_two_sided",
    "simulate_2d",
    "trace_ray",
    "two_sided_coefficients",
    "two_sided_exit_probability",
    "two_sided_mgf",
    "two_sided_overshoot_means",
]
