"""Consistent variable selection in nonparametric regression by Fourier thresholding."""

__version__ = "0.1.0"

from .lattice_count import (
    CountResult,
    MultiIndex,
    RepSeries,
    card_bound,
    count_exact,
    enumerate_ball,
    representation_numbers,
)
from .params import ModelParams
from .theta_saddle import (
    AsymptoticCount,
    RegimeReport,
    SaddlePoint,
    SaddlePointError,
    asymptotic_counts,
    figure_curves,
    phi,
    phi_prime,
    regime_constants,
    solve_saddle,
    theta_h,
)
from .fourier_select import (
    SelectionResult,
    TuningParams,
    basis_eval,
    empirical_coeff,
    relevance_Q,
    select,
    threshold_search,
    tuning,
)
from .synth import (
    ExperimentConfig,
    QuadratureCoefficients,
    SparseAdditiveFunction,
    TrialOutcome,
    fano_kl_bound,
    gen_design,
    gen_sample,
    lower_bound_conditions,
    mc_error,
    orth_check,
)

__all__ = [
    "__version__",
    "ModelParams",
    "CountResult",
    "MultiIndex",
    "RepSeries",
    "card_bound",
    "count_exact",
    "enumerate_ball",
    "representation_numbers",
    "AsymptoticCount",
    "RegimeReport",
    "SaddlePoint",
    "SaddlePointError",
    "asymptotic_counts",
    "figure_curves",
    "phi",
    "phi_prime",
    "regime_constants",
    "solve_saddle",
    "theta_h",
    "SelectionResult",
    "TuningParams",
    "basis_eval",
    "empirical_coeff",
    "relevance_Q",
    "select",
    "threshold_search",
    "tuning",
    "ExperimentConfig",
    "QuadratureCoefficients",
    "SparseAdditiveFunction",
    "TrialOutcome",
    "fano_kl_bound",
    "gen_design",
    "gen_sample",
    "lower_bound_conditions",
    "mc_error",
    "orth_check",
]
