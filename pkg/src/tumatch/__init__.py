"""Equilibrium wages and matches for two-sided one-to-one matching markets.

Workers and firms each choose a partner type (or stay unmatched) under
extreme-value taste shocks, payoffs are linear in a match-specific wage,
and market clearing pins the wage of every match type. The solver iterates
a damped fixed-point map over the wage matrix that is a contraction for
the supported choice models (logit, nested logit, generalized nested
logit), so it converges to the unique equilibrium from any start.

The hot log-probability kernels run on a compiled extension when it was
built and on NumPy otherwise; see :func:`active_backend`.
"""

from tumatch._backend import active_backend, available_backends, set_backend
from tumatch.diagnostics import (
    BoundedElasticityCheck,
    DiagnosticsReport,
    check_bounded_elasticities,
    contraction_ratio,
    diagnostics_report,
    infinity_norm,
    jacobian_fd,
    trace_reduction_rate,
)
from tumatch.gev import (
    GevGenerator,
    GnlGenerator,
    LogitGenerator,
    NestedLogitGenerator,
    generator_for,
    gev_logprobs,
    gev_probs,
    verify_generator,
)
from tumatch.io import (
    FORMAT_VERSION,
    MarketFileError,
    dumps_canonical,
    load_market,
    load_result,
    load_wages,
    market_document,
    result_document,
    save_market,
    save_result,
)
from tumatch.kernels import (
    ChoiceProbabilities,
    ElasticityTable,
    KernelError,
    choice_probabilities,
    elasticity_margins,
    firm_logprobs,
    gnl_logprobs,
    gnl_probs,
    logit_logprobs,
    logit_probs,
    nested_conditional_logprobs,
    nested_logit_logprobs,
    nested_logit_probs,
    own_elasticities,
    worker_logprobs,
)
from tumatch.market import (
    ChoiceModel,
    GeneralizedNestedLogit,
    Logit,
    MarketSpec,
    NestedLogit,
    SpecError,
    ValidatedSpec,
    scaled_payoffs,
    validate_spec,
)
from tumatch.oracle import McReport, OracleError, brute_force_equilibrium, mc_logit_probs
from tumatch.solver import (
    Matching,
    NumericsError,
    SolveOptions,
    SolveResult,
    StepScalars,
    clearing_residual,
    damping,
    fixed_point_map,
    generator_fixed_point_map,
    solve,
    solve_via_generators,
    step_scalars,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "active_backend",
    "available_backends",
    "set_backend",
    "ChoiceModel",
    "Logit",
    "NestedLogit",
    "GeneralizedNestedLogit",
    "MarketSpec",
    "ValidatedSpec",
    "SpecError",
    "validate_spec",
    "scaled_payoffs",
    "KernelError",
    "ChoiceProbabilities",
    "ElasticityTable",
    "logit_logprobs",
    "logit_probs",
    "nested_logit_logprobs",
    "nested_logit_probs",
    "nested_conditional_logprobs",
    "gnl_logprobs",
    "gnl_probs",
    "worker_logprobs",
    "firm_logprobs",
    "choice_probabilities",
    "own_elasticities",
    "elasticity_margins",
    "GevGenerator",
    "LogitGenerator",
    "NestedLogitGenerator",
    "GnlGenerator",
    "generator_for",
    "gev_logprobs",
    "gev_probs",
    "verify_generator",
    "NumericsError",
    "StepScalars",
    "SolveOptions",
    "SolveResult",
    "Matching",
    "step_scalars",
    "damping",
    "fixed_point_map",
    "clearing_residual",
    "solve",
    "generator_fixed_point_map",
    "solve_via_generators",
    "BoundedElasticityCheck",
    "DiagnosticsReport",
    "jacobian_fd",
    "infinity_norm",
    "contraction_ratio",
    "check_bounded_elasticities",
    "trace_reduction_rate",
    "diagnostics_report",
    "OracleError",
    "McReport",
    "mc_logit_probs",
    "brute_force_equilibrium",
    "MarketFileError",
    "FORMAT_VERSION",
    "dumps_canonical",
    "load_market",
    "save_market",
    "save_result",
    "load_result",
    "load_wages",
    "market_document",
    "result_document",
]
