"""Metropolis-within-Gibbs sampler for all three outcome families.

Each sweep runs, in fixed order: penalty auxiliaries, then the joint
discrete update of (z_j, tau_j) for every predictor, then the regression
coefficients (with the residual variance or the baseline-hazard increments),
then the form probability p_z and the per-predictor cutoff probabilities.

The (z, tau) update enumerates every admissible configuration of one
predictor -- the linear form plus one candidate per cutoff -- and samples
from the exact discrete full conditional.  For the continuous outcome the
coefficient of the predictor being updated is integrated out analytically
under its conditional normal prior (a collapsed update) and redrawn from its
conjugate conditional afterwards; the logistic and survival likelihoods have
no closed-form marginalization, so those enumerate at the current
coefficient value.

Chains are a pure function of (inputs, seed); chain k uses ``seed + k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.linalg as sla
from scipy.stats import geninvgauss

from .design import (
    BinaryOutcome,
    ContinuousOutcome,
    OrdinalDesign,
    Outcome,
    SurvivalOutcome,
    check_outcome_matches,
)
from .errors import NumericalError, ValidationError
from .priors import (
    PriorConfig,
    Lasso,
    beta_prior_variance,
    init_penalty_aux,
    update_horseshoe_auxiliaries,
    update_lasso_auxiliaries,
)

__all__ = [
    "ChainConfig",
    "MixtureState",
    "SurvivalGrid",
    "ModelContext",
    "MetropolisSteps",
    "DrawStore",
    "init_state",
    "ztau_log_weights",
    "update_ztau",
    "update_linear_params",
    "update_logistic_params",
    "update_survival_params",
    "update_pz_pi",
    "outcome_loglik",
    "run_chain",
    "run_chains",
]


@dataclass(frozen=True)
class ChainConfig:
    """MCMC run settings.  Defaults follow the reference simulation studies:
    10,000 iterations, 2,000 burn-in, 2 chains."""

    n_iter: int = 10000
    burn_in: int = 2000
    thin: int = 1
    n_chains: int = 2
    seed: int = 0
    mh_step: float = 0.5
    adapt_target: float = 0.44

    def __post_init__(self):
        if self.n_iter <= self.burn_in:
            raise ValidationError("burn_in must be smaller than n_iter")
        if self.burn_in < 0 or self.thin < 1 or self.n_chains < 1:
            raise ValidationError("invalid chain configuration")
        if not (0 < self.adapt_target < 1) or self.mh_step <= 0:
            raise ValidationError("invalid Metropolis settings")

    @property
    def n_kept(self) -> int:
        return len(range(self.burn_in, self.n_iter, self.thin))


@dataclass
class MixtureState:
    """One MCMC state.  ``tau[j]`` is always a valid cutoff for predictor j,
    meaningful when ``z[j] = 0``.  ``cfg_idx`` mirrors (z, tau) as an index
    into the per-predictor candidate-transform table."""

    z: np.ndarray
    tau: np.ndarray
    alpha: float
    beta: np.ndarray
    sigma2: Optional[float]
    pz: float
    pi: list
    penalty_aux: object
    hazard: Optional[np.ndarray]
    cfg_idx: np.ndarray


@dataclass(frozen=True)
class SurvivalGrid:
    """Counting-process discretization over the unique event times.

    Interval m starts at ``times[m]``; its prior baseline-hazard increment is
    ``baseline_rate * widths[m]``.  Censored times contribute to risk sets
    only.  ``cum_index[i]`` counts the grid times at or before subject i's
    observed time, so the cumulative hazard a subject is exposed to is the
    increment prefix sum at that index.
    """

    times: np.ndarray
    widths: np.ndarray
    prior_increments: np.ndarray
    dN_total: np.ndarray
    cum_index: np.ndarray
    order: np.ndarray
    sorted_times: np.ndarray
    first_at_risk: np.ndarray
    time: np.ndarray
    event: np.ndarray

    @classmethod
    def build(cls, outcome: SurvivalOutcome, baseline_rate: float) -> "SurvivalGrid":
        time, event = outcome.time, outcome.event
        times = np.unique(time[event == 1])
        m = times.size
        if m > 0:
            max_obs = float(time.max())
            if max_obs > times[-1]:
                tail = max_obs - times[-1]
            elif m >= 2:
                tail = float(np.mean(np.diff(times)))
            else:
                tail = float(times[0])
            widths = np.diff(times, append=times[-1] + tail)
        else:
            widths = np.empty(0)
        prior_increments = baseline_rate * widths
        dN_total = np.zeros(m, dtype=np.int64)
        if m > 0:
            idx = np.searchsorted(times, time[event == 1])
            np.add.at(dN_total, idx, 1)
        cum_index = np.searchsorted(times, time, side="right")
        order = np.argsort(time, kind="stable")
        sorted_times = time[order]
        first_at_risk = np.searchsorted(sorted_times, times, side="left")
        return cls(times=times, widths=widths, prior_increments=prior_increments,
                   dN_total=dN_total, cum_index=cum_index, order=order,
                   sorted_times=sorted_times, first_at_risk=first_at_risk,
                   time=time, event=event)

    @property
    def n_intervals(self) -> int:
        return self.times.size

    def risk_exp_sums(self, weights: np.ndarray) -> np.ndarray:
        """Per interval, the sum of ``weights`` over at-risk subjects."""
        if self.n_intervals == 0:
            return np.empty(0)
        ws = weights[self.order]
        suffix = np.concatenate([np.cumsum(ws[::-1])[::-1], [0.0]])
        return suffix[self.first_at_risk]

    def cumulative_hazard_per_subject(self, increments: np.ndarray) -> np.ndarray:
        cum = np.concatenate([[0.0], np.cumsum(increments)])
        return cum[self.cum_index]

    def at_risk_matrix(self) -> np.ndarray:
        """Dense Y_i(t_m) indicator matrix (for small-data checks)."""
        return (self.time[:, None] >= self.times[None, :]).astype(np.int64)

    def event_matrix(self) -> np.ndarray:
        """Dense dN_i(t_m) increment matrix (for small-data checks)."""
        dn = np.zeros((self.time.size, self.n_intervals), dtype=np.int64)
        for i in np.flatnonzero(self.event == 1):
            dn[i, int(np.searchsorted(self.times, self.time[i]))] = 1
        return dn


class ModelContext:
    """Per-dataset precomputation shared by all chains (immutable in use).

    ``transforms[j]`` stacks the candidate transform columns for predictor j:
    row 0 is the linear form, row 1 + k the indicator for the k-th cutoff.
    """

    def __init__(self, design: OrdinalDesign, outcome: Outcome, priors: PriorConfig):
        check_outcome_matches(design, outcome)
        self.design = design
        self.outcome = outcome
        self.priors = priors
        self.kind = outcome.kind
        n, J = design.n, design.J
        self.labels = []
        self.transforms = []
        self.transform_sq = []
        self.cut_pos = []
        rows = []
        offsets = np.empty(J, dtype=np.int64)
        total = 0
        for j in range(J):
            cuts = design.cutoffs[j]
            t = np.empty((1 + len(cuts), n))
            t[0] = design.x[:, j] / (2.0 * design.sd[j])
            for k_i, k in enumerate(cuts):
                t[1 + k_i] = (design.x[:, j] < k).astype(float)
            self.labels.append([(1, None)] + [(0, k) for k in cuts])
            self.transforms.append(t)
            self.transform_sq.append(np.einsum("ij,ij->i", t, t))
            self.cut_pos.append({k: i for i, k in enumerate(cuts)})
            offsets[j] = total
            total += t.shape[0]
            rows.append(t)
        self.all_transforms = np.concatenate(rows, axis=0)
        self.offsets = offsets
        self.uniform_cuts = len({len(c) for c in design.cutoffs}) == 1
        self.grid = SurvivalGrid.build(outcome, priors.r) if self.kind == "survival" else None

    def current_columns(self, state: MixtureState) -> np.ndarray:
        """(J, n) matrix of the transform columns selected by the state."""
        return self.all_transforms[self.offsets + state.cfg_idx]

    def eta(self, state: MixtureState) -> np.ndarray:
        base = state.alpha if self.kind != "survival" else 0.0
        return base + state.beta @ self.current_columns(state)


def init_state(design: OrdinalDesign, outcome: Outcome, priors: PriorConfig,
               rng: Optional[np.random.Generator] = None,
               grid: Optional[SurvivalGrid] = None) -> MixtureState:
    """Deterministic initial state: all predictors linear, coefficients zero,
    unit residual variance, uniform cutoff probabilities, auxiliaries one,
    hazard increments at their prior means."""
    check_outcome_matches(design, outcome)
    J = design.J
    hazard = None
    sigma2: Optional[float] = None
    if outcome.kind == "survival":
        if grid is None:
            grid = SurvivalGrid.build(outcome, priors.r)
        hazard = grid.prior_increments.copy()
    elif outcome.kind == "continuous":
        sigma2 = 1.0
    return MixtureState(
        z=np.ones(J, dtype=np.int8),
        tau=np.array([c[0] for c in design.cutoffs], dtype=np.int64),
        alpha=0.0,
        beta=np.zeros(J),
        sigma2=sigma2,
        pz=0.5,
        pi=[np.full(len(c), 1.0 / len(c)) for c in design.cutoffs],
        penalty_aux=init_penalty_aux(priors.penalty, J),
        hazard=hazard,
        cfg_idx=np.zeros(J, dtype=np.int64),
    )


def outcome_loglik(ctx: ModelContext, eta: np.ndarray, *, sigma2: Optional[float] = None,
                   hazard: Optional[np.ndarray] = None) -> float:
    """Log likelihood at linear predictor ``eta``.

    For survival only the eta-dependent Poisson terms are included; the
    ``dN log(dLambda)`` piece does not involve eta.
    """
    if ctx.kind == "continuous":
        n = ctx.outcome.n
        rss = float(np.sum((ctx.outcome.y - eta) ** 2))
        return -0.5 * n * math.log(2.0 * math.pi * sigma2) - 0.5 * rss / sigma2
    if ctx.kind == "binary":
        y = ctx.outcome.y
        return float(y @ eta - np.logaddexp(0.0, eta).sum())
    grid = ctx.grid
    a = grid.cumulative_hazard_per_subject(hazard)
    return float(grid.event @ eta - np.exp(eta) @ a)


def _config_log_prior(state: MixtureState, j: int) -> np.ndarray:
    pz = min(max(state.pz, 1e-300), 1.0 - 1e-16)
    lw = np.empty(1 + state.pi[j].size)
    lw[0] = math.log(pz)
    with np.errstate(divide="ignore"):
        lw[1:] = math.log1p(-pz) + np.log(state.pi[j])
    return lw


def _sample_categorical(rng: np.random.Generator, log_weights: np.ndarray) -> int:
    m = np.max(log_weights)
    if not np.isfinite(m):
        raise NumericalError(
            f"all {log_weights.size} form configurations have zero posterior weight"
        )
    p = np.exp(log_weights - m)
    cs = np.cumsum(p)
    u = rng.random() * cs[-1]
    return int(min(np.searchsorted(cs, u, side="right"), p.size - 1))


def ztau_log_weights(j: int, state: MixtureState, ctx: ModelContext,
                     carry: Optional[np.ndarray] = None,
                     collapsed: Optional[bool] = None) -> np.ndarray:
    """Unnormalized log full-conditional weights over the configurations
    {linear} + {cutoff k for each admissible k} of predictor j.

    ``carry`` is the current residual vector (continuous) or linear
    predictor (binary/survival); it is recomputed from the state when
    omitted.  ``collapsed`` defaults to True for the continuous outcome.
    """
    if collapsed is None:
        collapsed = ctx.kind == "continuous"
    t = ctx.transforms[j]
    cur = ctx.all_transforms[ctx.offsets[j] + state.cfg_idx[j]]
    lw = _config_log_prior(state, j)
    if ctx.kind == "continuous":
        if carry is None:
            carry = ctx.outcome.y - ctx.eta(state)
        r = carry + state.beta[j] * cur
        if collapsed:
            v = beta_prior_variance(j, state, ctx.priors)
            s2 = state.sigma2
            fr = t @ r
            tt = ctx.transform_sq[j]
            lw = lw - 0.5 * np.log1p(v * tt / s2) + 0.5 * v * fr ** 2 / (s2 * (s2 + v * tt))
        else:
            dev = r[None, :] - state.beta[j] * t
            lw = lw - 0.5 * np.einsum("ij,ij->i", dev, dev) / state.sigma2
    else:
        if carry is None:
            carry = ctx.eta(state)
        etas = (carry - state.beta[j] * cur)[None, :] + state.beta[j] * t
        if ctx.kind == "binary":
            y = ctx.outcome.y
            lw = lw + etas @ y - np.logaddexp(0.0, etas).sum(axis=1)
        else:
            grid = ctx.grid
            a = grid.cumulative_hazard_per_subject(state.hazard)
            lw = lw + etas @ grid.event - np.exp(etas) @ a
    return lw


def update_ztau(j: int, state: MixtureState, ctx: ModelContext,
                rng: np.random.Generator,
                carry: Optional[np.ndarray] = None,
                collapsed: Optional[bool] = None) -> np.ndarray:
    """Jointly redraw (z_j, tau_j) by exact enumeration; returns the updated
    carry vector (residuals or linear predictor).

    Continuous outcome defaults to the collapsed variant: beta_j is
    marginalized before enumeration and redrawn from its conjugate normal
    conditional under the chosen form.
    """
    if collapsed is None:
        collapsed = ctx.kind == "continuous"
    t = ctx.transforms[j]
    cur = ctx.all_transforms[ctx.offsets[j] + state.cfg_idx[j]]

    if ctx.kind == "continuous":
        if carry is None:
            carry = ctx.outcome.y - ctx.eta(state)
        r = carry + state.beta[j] * cur
        s2 = state.sigma2
        lw = _config_log_prior(state, j)
        fr = t @ r
        tt = ctx.transform_sq[j]
        if collapsed:
            v = beta_prior_variance(j, state, ctx.priors)
            lw = lw - 0.5 * np.log1p(v * tt / s2) + 0.5 * v * fr ** 2 / (s2 * (s2 + v * tt))
            idx = _sample_categorical(rng, lw)
            prec = tt[idx] / s2 + 1.0 / v
            mean = fr[idx] / s2 / prec
            state.beta[j] = rng.normal(mean, 1.0 / math.sqrt(prec))
        else:
            dev = r[None, :] - state.beta[j] * t
            lw = lw - 0.5 * np.einsum("ij,ij->i", dev, dev) / s2
            idx = _sample_categorical(rng, lw)
        _apply_config(state, ctx, j, idx)
        return r - state.beta[j] * t[idx]

    if carry is None:
        carry = ctx.eta(state)
    base = carry - state.beta[j] * cur
    etas = base[None, :] + state.beta[j] * t
    lw = _config_log_prior(state, j)
    if ctx.kind == "binary":
        y = ctx.outcome.y
        lw = lw + etas @ y - np.logaddexp(0.0, etas).sum(axis=1)
    else:
        grid = ctx.grid
        a = grid.cumulative_hazard_per_subject(state.hazard)
        lw = lw + etas @ grid.event - np.exp(etas) @ a
    idx = _sample_categorical(rng, lw)
    _apply_config(state, ctx, j, idx)
    return etas[idx]


def _apply_config(state: MixtureState, ctx: ModelContext, j: int, idx: int) -> None:
    z, tau = ctx.labels[j][idx]
    state.z[j] = z
    if tau is not None:
        state.tau[j] = tau
    state.cfg_idx[j] = idx


def update_linear_params(state: MixtureState, ctx: ModelContext,
                         rng: np.random.Generator) -> np.ndarray:
    """Draw (alpha, beta) jointly from their multivariate-normal full
    conditional, then the residual variance; returns the new residuals.

    Without shrinkage (and with the horseshoe, whose scales do not involve
    sigma2) the variance conditional is InvGamma(shape + n/2, rate + RSS/2).
    The lasso couples the coefficient prior to the model precision, which
    turns the conditional into a generalized inverse Gaussian.
    """
    y = ctx.outcome.y
    n, J = ctx.design.n, ctx.design.J
    s2 = state.sigma2
    f = np.empty((n, J + 1))
    f[:, 0] = 1.0
    f[:, 1:] = ctx.current_columns(state).T
    prior_prec = np.empty(J + 1)
    prior_prec[0] = 1.0 / ctx.priors.beta_variance
    for j in range(J):
        prior_prec[1 + j] = 1.0 / beta_prior_variance(j, state, ctx.priors)
    a = f.T @ f / s2
    a[np.diag_indices_from(a)] += prior_prec
    b = f.T @ y / s2
    try:
        chol = sla.cho_factor(a, lower=True)
    except sla.LinAlgError as exc:
        raise NumericalError("singular posterior precision in coefficient update") from exc
    mean = sla.cho_solve(chol, b)
    noise = sla.solve_triangular(chol[0].T, rng.standard_normal(J + 1), lower=False)
    coef = mean + noise
    state.alpha = float(coef[0])
    state.beta = coef[1:].copy()
    resid = y - f @ coef
    rss = float(resid @ resid)

    shape0, rate0 = ctx.priors.sigma2_shape, ctx.priors.sigma2_rate
    if isinstance(ctx.priors.penalty, Lasso):
        # beta_j | t_j, sigma2 ~ N(0, t_j/sigma2) adds (sigma2)^{J/2} exp(-psi*sigma2/2)
        psi = float(np.sum(state.beta ** 2 / state.penalty_aux.local_scale))
        chi = 2.0 * rate0 + rss
        p = 0.5 * J - shape0 - 0.5 * n
        if psi < 1e-300:
            state.sigma2 = 1.0 / rng.gamma(-p, 2.0 / chi)
        else:
            state.sigma2 = float(geninvgauss.rvs(
                p, math.sqrt(psi * chi), scale=math.sqrt(chi / psi), random_state=rng))
    else:
        state.sigma2 = 1.0 / rng.gamma(shape0 + 0.5 * n, 1.0 / (rate0 + 0.5 * rss))
    return resid


@dataclass
class MetropolisSteps:
    """Per-coordinate random-walk scales with Robbins-Monro adaptation toward
    a target acceptance rate; adaptation runs during burn-in only."""

    log_step: np.ndarray
    target: float = 0.44

    @classmethod
    def initial(cls, n_coords: int, step: float, target: float) -> "MetropolisSteps":
        return cls(log_step=np.full(n_coords, math.log(step)), target=target)

    def scale(self, coord: int) -> float:
        return math.exp(self.log_step[coord])

    def adapt(self, coord: int, accepted: bool, iteration: int) -> None:
        gain = (iteration + 1.0) ** -0.6
        self.log_step[coord] += gain * ((1.0 if accepted else 0.0) - self.target)
        self.log_step[coord] = min(max(self.log_step[coord], math.log(1e-3)), math.log(50.0))


def _mh_coordinate(value, prior_var, delta_loglik_fn, step, rng):
    prop = value + step * rng.standard_normal()
    dprior = -0.5 * (prop ** 2 - value ** 2) / prior_var
    dll = delta_loglik_fn(prop)
    accept = math.log(rng.random()) < dll + dprior
    return (prop, True) if accept else (value, False)


def update_logistic_params(state: MixtureState, ctx: ModelContext, steps: MetropolisSteps,
                           rng: np.random.Generator, eta: Optional[np.ndarray] = None,
                           adapt: bool = False, iteration: int = 0) -> np.ndarray:
    """Random-walk Metropolis on the Bernoulli-logit posterior, one coordinate
    at a time (intercept first); returns the updated linear predictor."""
    if eta is None:
        eta = ctx.eta(state)
    y = ctx.outcome.y
    cols = ctx.current_columns(state)

    cur_ll = float(y @ eta - np.logaddexp(0.0, eta).sum())
    if not math.isfinite(cur_ll):
        raise NumericalError("non-finite logistic log posterior at current state")

    def loglik(e):
        return float(y @ e - np.logaddexp(0.0, e).sum())

    prop = state.alpha + steps.scale(0) * rng.standard_normal()
    eta_prop = eta + (prop - state.alpha)
    prop_ll = loglik(eta_prop)
    dprior = -0.5 * (prop ** 2 - state.alpha ** 2) / ctx.priors.beta_variance
    accepted = math.log(rng.random()) < prop_ll - cur_ll + dprior
    if accepted:
        state.alpha, eta, cur_ll = float(prop), eta_prop, prop_ll
    if adapt:
        steps.adapt(0, accepted, iteration)

    for j in range(ctx.design.J):
        v = beta_prior_variance(j, state, ctx.priors)
        prop = state.beta[j] + steps.scale(1 + j) * rng.standard_normal()
        eta_prop = eta + (prop - state.beta[j]) * cols[j]
        prop_ll = loglik(eta_prop)
        dprior = -0.5 * (prop ** 2 - state.beta[j] ** 2) / v
        accepted = math.log(rng.random()) < prop_ll - cur_ll + dprior
        if accepted:
            state.beta[j], eta, cur_ll = float(prop), eta_prop, prop_ll
        if adapt:
            steps.adapt(1 + j, accepted, iteration)
    return eta


def update_survival_params(state: MixtureState, ctx: ModelContext, steps: MetropolisSteps,
                           rng: np.random.Generator, eta: Optional[np.ndarray] = None,
                           adapt: bool = False, iteration: int = 0) -> np.ndarray:
    """Metropolis update of each coefficient on the Poisson-increment
    likelihood, then conjugate gamma draws of every baseline-hazard
    increment: Gamma(c0*dL*_m + dN_m, c0 + sum_at_risk exp(eta))."""
    if eta is None:
        eta = ctx.eta(state)
    grid = ctx.grid
    a = grid.cumulative_hazard_per_subject(state.hazard)
    cols = ctx.current_columns(state)

    def loglik(e):
        ll = float(grid.event @ e - np.exp(e) @ a)
        return ll

    cur_ll = loglik(eta)
    if not math.isfinite(cur_ll):
        raise NumericalError("non-finite survival log posterior at current state")
    for j in range(ctx.design.J):
        v = beta_prior_variance(j, state, ctx.priors)
        prop = state.beta[j] + steps.scale(j) * rng.standard_normal()
        eta_prop = eta + (prop - state.beta[j]) * cols[j]
        prop_ll = loglik(eta_prop)
        dprior = -0.5 * (prop ** 2 - state.beta[j] ** 2) / v
        accepted = math.log(rng.random()) < prop_ll - cur_ll + dprior
        if accepted:
            state.beta[j], eta, cur_ll = float(prop), eta_prop, prop_ll
        if adapt:
            steps.adapt(j, accepted, iteration)

    if grid.n_intervals > 0:
        risk = grid.risk_exp_sums(np.exp(eta))
        shape = ctx.priors.c0 * grid.prior_increments + grid.dN_total
        rate = ctx.priors.c0 + risk
        state.hazard = rng.gamma(shape, 1.0 / rate)
    return eta


def update_pz_pi(state: MixtureState, ctx: ModelContext, rng: np.random.Generator) -> None:
    """Conjugate updates: pz from its Beta full conditional, each pi_j from
    its Dirichlet full conditional (tau_j counts only when z_j = 0)."""
    priors = ctx.priors
    J = ctx.design.J
    n1 = int(state.z.sum())
    state.pz = float(rng.beta(priors.pz_a + n1, priors.pz_b + (J - n1)))
    if ctx.uniform_cuts:
        m = state.pi[0].size
        conc = np.full((J, m), priors.dirichlet_weight)
        for j in range(J):
            if state.z[j] == 0:
                conc[j, ctx.cut_pos[j][int(state.tau[j])]] += 1.0
        g = rng.gamma(conc)
        g /= g.sum(axis=1, keepdims=True)
        for j in range(J):
            state.pi[j] = g[j]
    else:
        for j in range(J):
            conc = np.full(state.pi[j].size, priors.dirichlet_weight)
            if state.z[j] == 0:
                conc[ctx.cut_pos[j][int(state.tau[j])]] += 1.0
            state.pi[j] = rng.dirichlet(conc)


@dataclass
class DrawStore:
    """Post-burn-in, thinned draws of the model scalars for one chain."""

    kind: str
    iterations: np.ndarray
    beta: np.ndarray
    z: np.ndarray
    tau: np.ndarray
    pz: np.ndarray
    alpha: Optional[np.ndarray] = None
    sigma2: Optional[np.ndarray] = None
    hazard_total: Optional[np.ndarray] = None

    @property
    def n_draws(self) -> int:
        return self.beta.shape[0]


def run_chain(design: OrdinalDesign, outcome: Outcome, priors: PriorConfig,
              config: ChainConfig, chain_index: int = 0,
              ctx: Optional[ModelContext] = None) -> DrawStore:
    """Run one chain; fully deterministic given ``config.seed + chain_index``."""
    if ctx is None:
        ctx = ModelContext(design, outcome, priors)
    rng = np.random.default_rng(config.seed + chain_index)
    state = init_state(design, outcome, priors, grid=ctx.grid)
    kind = ctx.kind
    J = design.J

    steps = None
    if kind == "binary":
        steps = MetropolisSteps.initial(J + 1, config.mh_step, config.adapt_target)
    elif kind == "survival":
        steps = MetropolisSteps.initial(J, config.mh_step, config.adapt_target)

    n_kept = config.n_kept
    iterations = np.empty(n_kept, dtype=np.int64)
    beta_d = np.empty((n_kept, J))
    z_d = np.empty((n_kept, J), dtype=np.int8)
    tau_d = np.empty((n_kept, J), dtype=np.int64)
    pz_d = np.empty(n_kept)
    alpha_d = np.empty(n_kept) if kind != "survival" else None
    sigma2_d = np.empty(n_kept) if kind == "continuous" else None
    haz_d = np.empty(n_kept) if kind == "survival" else None

    pos = 0
    for t in range(config.n_iter):
        try:
            if ctx.priors.penalty is not None:
                if isinstance(ctx.priors.penalty, Lasso):
                    update_lasso_auxiliaries(state, ctx.priors, rng)
                else:
                    update_horseshoe_auxiliaries(state, ctx.priors, rng)

            if kind == "continuous":
                carry = ctx.outcome.y - ctx.eta(state)
            else:
                carry = ctx.eta(state)
            for j in range(J):
                carry = update_ztau(j, state, ctx, rng, carry=carry)

            adapt = t < config.burn_in
            if kind == "continuous":
                update_linear_params(state, ctx, rng)
            elif kind == "binary":
                update_logistic_params(state, ctx, steps, rng, eta=carry,
                                       adapt=adapt, iteration=t)
            else:
                update_survival_params(state, ctx, steps, rng, eta=carry,
                                       adapt=adapt, iteration=t)

            update_pz_pi(state, ctx, rng)
        except NumericalError as exc:
            raise NumericalError(f"chain {chain_index}, iteration {t}: {exc}") from exc

        if t >= config.burn_in and (t - config.burn_in) % config.thin == 0:
            iterations[pos] = t
            beta_d[pos] = state.beta
            z_d[pos] = state.z
            tau_d[pos] = state.tau
            pz_d[pos] = state.pz
            if alpha_d is not None:
                alpha_d[pos] = state.alpha
            if sigma2_d is not None:
                sigma2_d[pos] = state.sigma2
            if haz_d is not None:
                haz_d[pos] = float(state.hazard.sum()) if state.hazard.size else 0.0
            pos += 1

    return DrawStore(kind=kind, iterations=iterations, beta=beta_d, z=z_d,
                     tau=tau_d, pz=pz_d, alpha=alpha_d, sigma2=sigma2_d,
                     hazard_total=haz_d)


def run_chains(design: OrdinalDesign, outcome: Outcome, priors: PriorConfig,
               config: ChainConfig) -> list:
    """Run ``config.n_chains`` independent chains (chain k seeded seed + k)."""
    ctx = ModelContext(design, outcome, priors)
    return [run_chain(design, outcome, priors, config, chain_index=k, ctx=ctx)
            for k in range(config.n_chains)]
