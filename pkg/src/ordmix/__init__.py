"""Bayesian mixture modeling of ordinal predictors.

Each predictor's effect is inferred to be either linear in its levels
(rescaled by twice the column standard deviation) or a dichotomization at an
estimated changepoint, jointly with the regression coefficients, for
continuous, binary, and survival outcomes, with optional lasso or horseshoe
shrinkage.
"""

from .design import (
    BinaryOutcome,
    ContinuousOutcome,
    OrdinalDesign,
    SurvivalOutcome,
    TransformConfig,
    candidate_cutoffs,
    column_sd,
    linear_predictor,
    transform_predictor,
)
from .diagnostics import (
    ConvergenceReport,
    PosteriorSummary,
    check_convergence,
    gelman_rubin,
    summarize,
)
from .fitting import FitResult, fit_model
from .mcmc import (
    ChainConfig,
    DrawStore,
    MixtureState,
    ModelContext,
    SurvivalGrid,
    init_state,
    run_chain,
    run_chains,
)
from .oracle import ExactPosterior, compare_mcmc_to_oracle, enumerate_posterior
from .priors import (
    Horseshoe,
    Lasso,
    PriorConfig,
    beta_prior_variance,
    default_priors,
)
from .simulate import (
    PredictorTruth,
    ScenarioSpec,
    SimReport,
    gen_ordinal_predictors,
    gen_outcome,
    load_scenario,
    run_replications,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryOutcome", "ContinuousOutcome", "OrdinalDesign", "SurvivalOutcome",
    "TransformConfig", "candidate_cutoffs", "column_sd", "linear_predictor",
    "transform_predictor",
    "ConvergenceReport", "PosteriorSummary", "check_convergence", "gelman_rubin",
    "summarize",
    "FitResult", "fit_model",
    "ChainConfig", "DrawStore", "MixtureState", "ModelContext", "SurvivalGrid",
    "init_state", "run_chain", "run_chains",
    "ExactPosterior", "compare_mcmc_to_oracle", "enumerate_posterior",
    "Horseshoe", "Lasso", "PriorConfig", "beta_prior_variance", "default_priors",
    "PredictorTruth", "ScenarioSpec", "SimReport", "gen_ordinal_predictors",
    "gen_outcome", "load_scenario", "run_replications",
]
