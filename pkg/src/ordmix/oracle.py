"""Exact posterior over form configurations for small continuous-outcome models.

Independent of the sampler: for every joint configuration of the predictor
forms, the coefficients are integrated out analytically given the residual
variance, the residual variance is integrated by deterministic high-resolution
quadrature on the log scale, and the discrete prior weight integrates the form
probability and cutoff probabilities under their Beta/Dirichlet priors.
Normalizing over configurations gives exact P(Z_j = 1) and
P(tau_j = k, Z_j = 0) to certify MCMC output against.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import betaln, logsumexp

from .design import ContinuousOutcome, OrdinalDesign, TransformConfig, check_outcome_matches
from .errors import (
    TooManyConfigurationsError,
    UnsupportedPenaltyError,
    ValidationError,
)
from .priors import PriorConfig

__all__ = ["ExactPosterior", "enumerate_posterior", "compare_mcmc_to_oracle"]

_COARSE_GRID = np.linspace(-60.0, 40.0, 501)
_FINE_HALF_WIDTH = 25.0
_FINE_POINTS = 3001


@dataclass(frozen=True)
class ExactPosterior:
    """Joint posterior over form configurations and its marginals.

    ``configs[c]`` is a tuple of (z_j, tau_j) labels, ``probs[c]`` its exact
    posterior probability, and ``coef_mean[c]`` the exact posterior mean of
    (alpha, beta_1..beta_J) under that configuration.
    """

    configs: tuple
    log_weights: np.ndarray
    probs: np.ndarray
    p_z1: np.ndarray
    p_tau: tuple
    coef_mean: np.ndarray

    def config_prob(self, labels) -> float:
        return float(self.probs[self.configs.index(tuple(labels))])


def _log_marginal_and_mean(y, f, beta_variance, shape, rate):
    """Coefficients integrated analytically given sigma2; sigma2 integrated by
    trapezoid quadrature in log sigma2.  Returns (log marginal, posterior
    coefficient mean)."""
    n, d = f.shape
    b_mat = beta_variance * (f.T @ f)
    lam, q_vecs = np.linalg.eigh(b_mat)
    lam = np.clip(lam, 0.0, None)
    q = q_vecs.T @ (math.sqrt(beta_variance) * (f.T @ y))
    yty = float(y @ y)

    def log_integrand(u):
        s2 = np.exp(u)
        denom = s2[:, None] + lam[None, :]
        logdet = (n - d) * u + np.log(denom).sum(axis=1)
        quad = (yty - (q[None, :] ** 2 / denom).sum(axis=1)) / s2
        loglik = -0.5 * (n * math.log(2.0 * math.pi) + logdet + quad)
        logprior = shape * math.log(rate) - math.lgamma(shape) - (shape + 1.0) * u - rate / s2
        return loglik + logprior + u

    coarse = log_integrand(_COARSE_GRID)
    u_star = float(_COARSE_GRID[int(np.argmax(coarse))])
    u = np.linspace(u_star - _FINE_HALF_WIDTH, u_star + _FINE_HALF_WIDTH, _FINE_POINTS)
    g = log_integrand(u)
    h = u[1] - u[0]
    log_w = np.full(u.size, math.log(h))
    log_w[0] -= math.log(2.0)
    log_w[-1] -= math.log(2.0)
    log_ml = float(logsumexp(g + log_w))

    post = np.exp(g - g.max())
    post /= post.sum()
    s2 = np.exp(u)
    coef_in_q = q[None, :] / (s2[:, None] + lam[None, :])
    mean_q = post @ coef_in_q
    coef_mean = math.sqrt(beta_variance) * (q_vecs @ mean_q)
    return log_ml, coef_mean


def enumerate_posterior(design: OrdinalDesign, outcome: ContinuousOutcome,
                        priors: PriorConfig, max_configs: int = 4096) -> ExactPosterior:
    """Exact posterior over all form configurations of a continuous-outcome model.

    Requires no penalty.  The number of configurations,
    prod_j (1 + #cutoffs_j), must not exceed ``max_configs``.
    """
    if outcome.kind != "continuous":
        raise ValidationError("exact enumeration supports the continuous outcome only")
    check_outcome_matches(design, outcome)
    if priors.penalty is not None:
        raise UnsupportedPenaltyError("exact enumeration requires penalty=None")
    J = design.J
    per_pred = [[(1, None)] + [(0, k) for k in design.cutoffs[j]] for j in range(J)]
    n_configs = 1
    for labels in per_pred:
        n_configs *= len(labels)
    if n_configs > max_configs:
        raise TooManyConfigurationsError(
            f"{n_configs} configurations exceed the cap of {max_configs}")

    y = outcome.y
    n = design.n
    columns = []
    for j in range(J):
        cols = {(1, None): design.x[:, j] / (2.0 * design.sd[j])}
        for k in design.cutoffs[j]:
            cols[(0, k)] = (design.x[:, j] < k).astype(float)
        columns.append(cols)

    configs = []
    log_weights = np.empty(n_configs)
    coef_means = np.empty((n_configs, J + 1))
    log_base = betaln(priors.pz_a, priors.pz_b)
    f = np.empty((n, J + 1))
    f[:, 0] = 1.0
    for c, labels in enumerate(itertools.product(*per_pred)):
        for j, lab in enumerate(labels):
            f[:, 1 + j] = columns[j][lab]
        n1 = sum(1 for lab in labels if lab[0] == 1)
        log_prior = betaln(priors.pz_a + n1, priors.pz_b + J - n1) - log_base
        log_prior -= sum(math.log(len(design.cutoffs[j]))
                         for j, lab in enumerate(labels) if lab[0] == 0)
        log_ml, coef_mean = _log_marginal_and_mean(
            y, f, priors.beta_variance, priors.sigma2_shape, priors.sigma2_rate)
        configs.append(tuple(labels))
        log_weights[c] = log_prior + log_ml
        coef_means[c] = coef_mean

    probs = np.exp(log_weights - logsumexp(log_weights))
    probs /= probs.sum()
    p_z1 = np.zeros(J)
    p_tau = [dict.fromkeys(design.cutoffs[j], 0.0) for j in range(J)]
    for c, labels in enumerate(configs):
        for j, (z, tau) in enumerate(labels):
            if z == 1:
                p_z1[j] += probs[c]
            else:
                p_tau[j][tau] += probs[c]
    return ExactPosterior(configs=tuple(configs), log_weights=log_weights,
                          probs=probs, p_z1=p_z1,
                          p_tau=tuple(p_tau), coef_mean=coef_means)


def random_linear_instance(seed: int, n: int = 20, J: int = 2,
                           noise_sd: float = 0.3):
    """Deterministic small continuous-outcome instance for oracle comparisons.

    Levels 0..3 cut from standard normals at the 30/60/85 percentiles, all
    cutoffs admissible, and a random truth mixing linear and threshold forms
    with moderate coefficients.
    """
    from .simulate import gen_ordinal_predictors  # deferred: avoids import at module load

    for attempt in range(64):
        rng = np.random.default_rng(int(seed) + 1_000_003 * attempt)
        x = gen_ordinal_predictors(n, J, 0.0, (30.0, 60.0, 85.0), rng)
        if all(len(np.unique(x[:, j])) >= 2 for j in range(J)):
            break
    else:  # pragma: no cover - vanishing probability
        raise ValidationError("could not generate a nonconstant design")
    design = OrdinalDesign(x, cutoffs=tuple((1, 2, 3) for _ in range(J)), levels=(3,) * J)
    eta = np.zeros(n)
    truth = []
    for j in range(J):
        beta = float(rng.uniform(0.3, 0.9) * rng.choice((-1.0, 1.0)))
        if rng.random() < 0.5:
            cfg = TransformConfig(z=1)
        else:
            cfg = TransformConfig(z=0, tau=int(rng.choice((1, 2, 3))))
        truth.append((beta, cfg))
        col = design.x[:, j] / (2.0 * design.sd[j]) if cfg.z == 1 \
            else (design.x[:, j] < cfg.tau).astype(float)
        eta += beta * col
    y = eta + noise_sd * rng.standard_normal(n)
    return design, ContinuousOutcome(y), truth


def compare_mcmc_to_oracle(n_instances: int = 3, seed: int = 7000,
                           n: int = 20, J: int = 2,
                           chain_config=None, priors: Optional[PriorConfig] = None):
    """Run sampler and oracle on random instances; per instance, report the
    largest absolute difference in P(Z_j = 1).  Returns (records, elapsed s).
    """
    from .diagnostics import summarize
    from .mcmc import ChainConfig, run_chains

    if priors is None:
        priors = PriorConfig()
    if chain_config is None:
        chain_config = ChainConfig(n_iter=22000, burn_in=2000, thin=1, n_chains=2, seed=0)
    t0 = time.perf_counter()
    records = []
    for i in range(n_instances):
        inst_seed = seed + 137 * i
        design, outcome, _ = random_linear_instance(inst_seed, n=n, J=J)
        exact = enumerate_posterior(design, outcome, priors)
        cfg = ChainConfig(n_iter=chain_config.n_iter, burn_in=chain_config.burn_in,
                          thin=chain_config.thin, n_chains=chain_config.n_chains,
                          seed=inst_seed, mh_step=chain_config.mh_step,
                          adapt_target=chain_config.adapt_target)
        stores = run_chains(design, outcome, priors, cfg)
        summary = summarize(stores, design)
        diffs = np.abs(summary.p_z1 - exact.p_z1)
        records.append({
            "seed": inst_seed,
            "oracle_p_z1": exact.p_z1.copy(),
            "mcmc_p_z1": summary.p_z1.copy(),
            "max_abs_diff": float(diffs.max()),
        })
    return records, time.perf_counter() - t0
