"""Prior configuration and the lasso / horseshoe shrinkage hierarchies.

Parameterization
----------------
Both penalties treat their second parameter as a prior *variance*, so that a
larger tuning constant ``lam`` means a wider prior and therefore weaker
shrinkage:

* Lasso: coefficients are marginally double-exponential with variance
  ``lam * v`` where ``v`` is the model precision (``1/sigma2`` for the
  continuous outcome, 1 otherwise).  The sampler uses the exponential
  scale-mixture representation ``beta_j | t_j ~ N(0, t_j * v)`` with
  ``t_j ~ Exp(mean lam)``; marginalizing ``t_j`` recovers the
  double-exponential with scale ``sqrt(lam * v / 2)``.

* Horseshoe: ``beta_j ~ N(0, lam * (v_s * v_j)**2)`` with local scales
  ``v_j`` and a global scale ``v_s``, each Half-Cauchy(0, 1).  Sampling uses
  the two-level inverse-gamma expansion of the half-Cauchy (one auxiliary
  per scale), which is conjugate at every level: if
  ``s | a ~ InvGamma(1/2, 1/a)`` and ``a ~ InvGamma(1/2, 1)`` then
  ``sqrt(s) ~ Half-Cauchy(0, 1)``.

The intercept is never penalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import NumericalError, ValidationError


@dataclass(frozen=True)
class Lasso:
    lam: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValidationError("lasso lambda must be a positive finite number")


@dataclass(frozen=True)
class Horseshoe:
    lam: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValidationError("horseshoe lambda must be a positive finite number")


Penalty = Union[None, Lasso, Horseshoe]


@dataclass(frozen=True)
class PriorConfig:
    """Hyperparameters for every block of the model.

    ``beta_variance`` is the normal prior variance for the intercept and,
    under no penalty, for each coefficient.  ``sigma2_shape``/``sigma2_rate``
    parameterize the inverse-gamma prior on the residual variance.
    ``pz_a``/``pz_b`` are the Beta hyperparameters for the linear-form
    probability, ``dirichlet_weight`` the common concentration for each
    predictor's cutoff distribution.  ``c0`` and ``r`` drive the
    gamma-process baseline hazard: prior increments ``r * (t_{m+1} - t_m)``
    with confidence weight ``c0``.
    """

    beta_variance: float = 1000.0
    sigma2_shape: float = 0.01
    sigma2_rate: float = 0.01
    pz_a: float = 0.5
    pz_b: float = 0.5
    dirichlet_weight: float = 1.0
    penalty: Penalty = None
    c0: float = 0.001
    r: float = 0.01

    def __post_init__(self):
        for name in ("beta_variance", "sigma2_shape", "sigma2_rate", "pz_a", "pz_b",
                     "dirichlet_weight", "c0", "r"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValidationError(f"{name} must be a positive finite number")
        if self.penalty is not None and not isinstance(self.penalty, (Lasso, Horseshoe)):
            raise ValidationError("penalty must be None, Lasso, or Horseshoe")


def default_priors(outcome_kind: str) -> PriorConfig:
    """Default priors: vague normal coefficients, InvGamma(0.01, 0.01) residual
    variance, Beta(0.5, 0.5) form probability, unit Dirichlet weights, no
    penalty, and a weak gamma-process baseline (c0=0.001, r=0.01)."""
    if outcome_kind not in ("continuous", "binary", "survival"):
        raise ValidationError(f"unknown outcome kind: {outcome_kind!r}")
    return PriorConfig()


@dataclass
class LassoAux:
    """Per-coefficient variance mixture auxiliaries ``t_j``."""

    local_scale: np.ndarray

    @classmethod
    def initial(cls, J: int) -> "LassoAux":
        return cls(local_scale=np.ones(J))


@dataclass
class HorseshoeAux:
    """Half-Cauchy scales plus one inverse-gamma auxiliary per scale."""

    local: np.ndarray
    global_scale: float
    local_aux: np.ndarray
    global_aux: float

    @classmethod
    def initial(cls, J: int) -> "HorseshoeAux":
        return cls(local=np.ones(J), global_scale=1.0,
                   local_aux=np.ones(J), global_aux=1.0)


PenaltyAuxiliaries = Union[None, LassoAux, HorseshoeAux]


def init_penalty_aux(penalty: Penalty, J: int) -> PenaltyAuxiliaries:
    if penalty is None:
        return None
    if isinstance(penalty, Lasso):
        return LassoAux.initial(J)
    return HorseshoeAux.initial(J)


def _model_precision(state) -> float:
    # 1/sigma2 for the continuous outcome; 1 when there is no dispersion.
    if state.sigma2 is None:
        return 1.0
    return 1.0 / state.sigma2


def beta_prior_variance(j: int, state, config: PriorConfig) -> float:
    """Conditional normal prior variance of coefficient j given the penalty state."""
    penalty = config.penalty
    if penalty is None:
        return config.beta_variance
    aux = state.penalty_aux
    if isinstance(penalty, Lasso):
        return float(aux.local_scale[j] * _model_precision(state))
    return float(penalty.lam * (aux.global_scale * aux.local[j]) ** 2)


def lasso_marginal_scale(lam: float, precision: float = 1.0) -> float:
    """Double-exponential scale implied by marginalizing the lasso auxiliaries."""
    return math.sqrt(lam * precision / 2.0)


def update_lasso_auxiliaries(state, config: PriorConfig, rng: np.random.Generator):
    """Draw each ``t_j`` from its generalized-inverse-Gaussian full conditional.

    With ``beta_j | t_j ~ N(0, t_j * v)`` and ``t_j ~ Exp(mean lam)`` the
    conditional is GIG(1/2, psi=2/lam, chi=beta_j^2/v); its reciprocal is
    inverse-Gaussian, which is what gets sampled.  ``beta_j = 0`` collapses
    to a Gamma(1/2) draw.
    """
    aux = state.penalty_aux
    lam = config.penalty.lam
    beta = state.beta
    if not np.all(np.isfinite(beta)):
        raise NumericalError("non-finite coefficients in lasso auxiliary update")
    v = _model_precision(state)
    psi = 2.0 / lam
    for j in range(beta.size):
        chi = beta[j] ** 2 / v
        if chi < 1e-28:
            # boundary case: the conditional is Gamma(1/2, scale lam)
            t = rng.gamma(0.5, lam)
        else:
            mean = math.sqrt(psi / chi)
            t = 1.0 / rng.wald(mean, psi)
        aux.local_scale[j] = max(t, 1e-300)
    return aux


def lasso_conditional_mean(beta_j: float, lam: float, precision: float = 1.0) -> float:
    """Closed-form conditional mean of the lasso auxiliary given a coefficient."""
    chi = beta_j ** 2 / precision
    psi = 2.0 / lam
    return math.sqrt(chi / psi) + 1.0 / psi


def _inv_gamma(rng: np.random.Generator, shape: float, scale: float) -> float:
    # x ~ InvGamma(shape, scale)  <=>  1/x ~ Gamma(shape, rate=scale)
    return 1.0 / rng.gamma(shape, 1.0 / scale)


def update_horseshoe_auxiliaries(state, config: PriorConfig, rng: np.random.Generator):
    """Sweep the parameter-expanded horseshoe hierarchy.

    Works on the squared scales, where every full conditional is
    inverse-gamma; the stored ``local``/``global_scale`` values are the
    square roots, marginally Half-Cauchy(0, 1) under the prior.
    """
    aux = state.penalty_aux
    lam = config.penalty.lam
    beta = state.beta
    if not np.all(np.isfinite(beta)):
        raise NumericalError("non-finite coefficients in horseshoe auxiliary update")
    J = beta.size
    g = aux.global_scale ** 2
    local_sq = aux.local ** 2
    for j in range(J):
        local_sq[j] = _inv_gamma(rng, 1.0, 1.0 / aux.local_aux[j] + beta[j] ** 2 / (2.0 * lam * g))
        aux.local_aux[j] = _inv_gamma(rng, 1.0, 1.0 + 1.0 / local_sq[j])
    g = _inv_gamma(
        rng, 0.5 * (J + 1),
        1.0 / aux.global_aux + float(np.sum(beta ** 2 / local_sq)) / (2.0 * lam),
    )
    aux.global_aux = _inv_gamma(rng, 1.0, 1.0 + 1.0 / g)
    aux.local = np.sqrt(local_sq)
    aux.global_scale = math.sqrt(g)
    if not (np.all(aux.local > 0) and aux.global_scale > 0):
        raise NumericalError("horseshoe scales left the positive support")
    return aux


def forward_halfcauchy(rng: np.random.Generator, size: int) -> np.ndarray:
    """Forward-simulate the two-level inverse-gamma chain; marginally HC(0, 1)."""
    a = 1.0 / rng.gamma(0.5, 1.0, size=size)
    # s | a ~ InvGamma(1/2, 1/a), so 1/s ~ Gamma(1/2, rate=1/a) = Gamma(1/2, scale=a)
    s = 1.0 / rng.gamma(0.5, a)
    return np.sqrt(s)
