"""Variational regularization laboratory on truncated spectral bases.

Solves 0.5*||K u||^2 - <K u, f> + alpha*R(u) for diagonal spectral
operators K and convex penalties R, measures errors in Bregman distances,
evaluates approximate-source diagnostics, and reproduces convergence-rate
exponents by seeded Monte-Carlo sweeps.
"""

from .basis import (
    BasisSpec,
    CoefficientField,
    besov1_norm,
    dual_pairing,
    sobolev_norm,
    unit_field,
    zero_field,
)
from .errors import ConfigError, NonconvergenceError
from .experiments import (
    RateExperimentConfig,
    RateReport,
    build_truth,
    fit_rate,
    mc_expectation,
    run_rate_sweep,
)
from .noise import NoiseSample, derive_seed, sample_white_noise, synthesize_data
from .operators import SpectralOperator, apply, operator_from_config, power_operator
from .penalties import (
    BesovOne,
    Penalty,
    PPower,
    Quadratic,
    ScalingData,
    TotalVariation,
    bregman,
    dual_norm_S,
    duality_map_jp,
    penalty_from_config,
    scaling_data,
    subgradient_from_optimality,
    symmetric_bregman,
)
from .solvers import (
    MinimizerResult,
    SolverError,
    SolverOptions,
    objective_value,
    optimality_residual,
    solve_variational,
    verify_optimality,
)
from .source import (
    BoundCheck,
    RateRule,
    SourceOrderEstimate,
    approx_source_dual_value,
    approx_source_value,
    approx_source_value_any,
    apriori_penalty_bound,
    balance_zeta,
    check_error_bound,
    choose_zetas,
    distance_function,
    embedding_bound,
    estimate_source_order,
    rate_rule,
)

__version__ = "0.1.0"
