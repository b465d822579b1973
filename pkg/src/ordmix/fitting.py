"""High-level fit entry point tying chains, summaries, and diagnostics together."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .design import OrdinalDesign, Outcome
from .diagnostics import ConvergenceReport, PosteriorSummary, check_convergence, summarize
from .mcmc import ChainConfig, run_chains
from .priors import PriorConfig, default_priors


@dataclass(frozen=True)
class FitResult:
    summary: PosteriorSummary
    convergence: ConvergenceReport
    stores: tuple
    config: ChainConfig
    priors: PriorConfig


def fit_model(design: OrdinalDesign, outcome: Outcome,
              priors: Optional[PriorConfig] = None,
              config: Optional[ChainConfig] = None,
              predictor_names: Optional[Sequence[str]] = None,
              rhat_threshold: float = 1.1) -> FitResult:
    """Run all configured chains and summarize the merged draws."""
    if priors is None:
        priors = default_priors(outcome.kind)
    if config is None:
        config = ChainConfig()
    stores = run_chains(design, outcome, priors, config)
    summary = summarize(stores, design, predictor_names=predictor_names)
    convergence = check_convergence(summary, threshold=rhat_threshold)
    return FitResult(summary=summary, convergence=convergence, stores=tuple(stores),
                     config=config, priors=priors)
