"""Convergence diagnostics and posterior summaries.

The scale-reduction diagnostic follows the classic between/within-chain
variance comparison:  R = sqrt(((n-1)/n * W + B/n) / W)  with W the mean
within-chain variance and B = n * variance of the chain means.  Discrete
form indicators are excluded; their cross-chain agreement shows up through
the reported form probabilities instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .design import OrdinalDesign
from .errors import EmptyDrawsError, InsufficientChainsError, NumericalError, ValidationError
from .mcmc import DrawStore

__all__ = [
    "ScalarSummary",
    "PosteriorSummary",
    "ConvergenceReport",
    "gelman_rubin",
    "summarize",
    "check_convergence",
]


def gelman_rubin(chains: Sequence[np.ndarray]) -> float:
    """Potential scale reduction factor over two or more equal-length chains."""
    arrays = [np.asarray(c, dtype=float) for c in chains]
    if len(arrays) < 2:
        raise InsufficientChainsError("need at least 2 chains")
    n = arrays[0].size
    if n < 2 or any(a.ndim != 1 or a.size != n for a in arrays):
        raise ValidationError("chains must be 1-D, equal length, and of length >= 2")
    stacked = np.stack(arrays)
    w = float(np.mean(np.var(stacked, axis=1, ddof=1)))
    if w == 0.0:
        raise NumericalError("zero within-chain variance")
    b = n * float(np.var(np.mean(stacked, axis=1), ddof=1))
    return math.sqrt(((n - 1) / n * w + b / n) / w)


@dataclass(frozen=True)
class ScalarSummary:
    mean: float
    sd: float
    ci_low: float
    ci_high: float
    selected: bool
    rhat: Optional[float] = None


@dataclass(frozen=True)
class PosteriorSummary:
    """Per-parameter moments and intervals plus per-predictor form
    probabilities: ``p_z1[j]`` for the linear form and the joint
    ``p_tau[j][k] = P(tau_j = k and z_j = 0)``; the two partition every draw,
    so ``p_z1[j] + sum_k p_tau[j][k] = 1``."""

    parameters: dict
    predictor_names: tuple
    cutoffs: tuple
    p_z1: np.ndarray
    p_tau: tuple
    n_draws: int
    n_chains: int

    def beta_name(self, j: int) -> str:
        return f"beta_{self.predictor_names[j]}"


def _scalar_summary(merged: np.ndarray, per_chain: Optional[list]) -> ScalarSummary:
    mean = float(merged.mean())
    sd = float(merged.std(ddof=1)) if merged.size > 1 else 0.0
    lo, hi = (float(q) for q in np.quantile(merged, [0.025, 0.975], method="linear"))
    rhat = None
    if per_chain is not None:
        try:
            rhat = gelman_rubin(per_chain)
        except NumericalError:
            rhat = float("nan")
    return ScalarSummary(mean=mean, sd=sd, ci_low=lo, ci_high=hi,
                         selected=not (lo <= 0.0 <= hi), rhat=rhat)


def summarize(stores: Sequence[DrawStore], design: OrdinalDesign,
              predictor_names: Optional[Sequence[str]] = None) -> PosteriorSummary:
    """Summarize one or more chains into the reporting quantities.

    Quantiles use linear interpolation of the order statistics; a parameter
    is flagged selected when its equal-tailed 95% interval excludes zero.
    Scale-reduction factors are attached when at least two equal-length
    chains are supplied.
    """
    if len(stores) == 0 or sum(s.n_draws for s in stores) == 0:
        raise EmptyDrawsError("no draws to summarize")
    J = design.J
    if predictor_names is None:
        predictor_names = tuple(f"x{j + 1}" for j in range(J))
    else:
        predictor_names = tuple(predictor_names)
        if len(predictor_names) != J:
            raise ValidationError("need one predictor name per column")

    lengths = {s.n_draws for s in stores}
    multi = len(stores) >= 2 and len(lengths) == 1

    parameters: dict = {}
    if stores[0].alpha is not None:
        merged = np.concatenate([s.alpha for s in stores])
        parameters["alpha"] = _scalar_summary(
            merged, [s.alpha for s in stores] if multi else None)
    for j in range(J):
        merged = np.concatenate([s.beta[:, j] for s in stores])
        parameters[f"beta_{predictor_names[j]}"] = _scalar_summary(
            merged, [s.beta[:, j] for s in stores] if multi else None)
    if stores[0].sigma2 is not None:
        merged = np.concatenate([s.sigma2 for s in stores])
        parameters["sigma2"] = _scalar_summary(
            merged, [s.sigma2 for s in stores] if multi else None)
    merged_pz = np.concatenate([s.pz for s in stores])
    parameters["pz"] = _scalar_summary(merged_pz, None)

    z_all = np.concatenate([s.z for s in stores], axis=0)
    tau_all = np.concatenate([s.tau for s in stores], axis=0)
    total = z_all.shape[0]
    p_z1 = z_all.mean(axis=0)
    p_tau = []
    for j in range(J):
        zero_mask = z_all[:, j] == 0
        p_tau.append({
            k: float(np.count_nonzero(zero_mask & (tau_all[:, j] == k))) / total
            for k in design.cutoffs[j]
        })

    return PosteriorSummary(parameters=parameters,
                            predictor_names=predictor_names,
                            cutoffs=design.cutoffs,
                            p_z1=p_z1, p_tau=tuple(p_tau),
                            n_draws=total, n_chains=len(stores))


@dataclass(frozen=True)
class ConvergenceReport:
    passed: bool
    assessable: bool
    threshold: float
    offenders: tuple
    rhats: dict

    def describe(self) -> str:
        if not self.assessable:
            return "convergence: not assessable (need at least 2 chains)"
        if self.passed:
            return f"convergence: pass (all R-hat < {self.threshold})"
        names = ", ".join(self.offenders)
        return f"convergence: FAIL (R-hat >= {self.threshold} for: {names})"


def check_convergence(summary: PosteriorSummary, threshold: float = 1.1) -> ConvergenceReport:
    """Pass iff every scale-reduction factor is below ``threshold``."""
    if threshold <= 0:
        raise ValidationError("threshold must be positive")
    rhats = {name: s.rhat for name, s in summary.parameters.items() if s.rhat is not None}
    if not rhats:
        return ConvergenceReport(passed=False, assessable=False, threshold=threshold,
                                 offenders=(), rhats={})
    offenders = tuple(name for name, r in rhats.items()
                      if not math.isfinite(r) or r >= threshold)
    return ConvergenceReport(passed=len(offenders) == 0, assessable=True,
                             threshold=threshold, offenders=offenders, rhats=rhats)
