"""Ordinal design matrices and the two-branch predictor transform.

Each predictor column holds integer levels 0..K.  A predictor enters the
regression either linearly, rescaled by twice its sample standard deviation
so that its coefficient is comparable to a binary predictor's, or as the
indicator ``x < tau`` for a threshold ``tau`` drawn from the column's set of
admissible cutoffs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import (
    ConstantColumnError,
    DimensionMismatchError,
    InsufficientDataError,
    NoAdmissibleCutoffError,
    ValidationError,
)


def column_sd(column) -> float:
    """Sample standard deviation (n-1 denominator) of one predictor column.

    Raises ``InsufficientDataError`` for fewer than two values and
    ``ConstantColumnError`` for zero variance.
    """
    arr = np.asarray(column, dtype=float)
    if arr.ndim != 1:
        raise ValidationError("column must be one-dimensional")
    if arr.size < 2:
        raise InsufficientDataError("need at least 2 observations to compute a standard deviation")
    sd = float(arr.std(ddof=1))
    if not np.isfinite(sd) or sd <= 0.0:
        raise ConstantColumnError("column has zero variance")
    return sd


def candidate_cutoffs(column, min_cell: int = 5) -> tuple[int, ...]:
    """Admissible thresholds for dichotomizing one column.

    A threshold k in {1..K} is admissible when both groups ``x < k`` and
    ``x >= k`` contain at least ``min_cell`` observations.  Returns the
    admissible thresholds in ascending order; raises
    ``NoAdmissibleCutoffError`` when none qualifies (the caller may then
    only treat the predictor as linear).
    """
    if min_cell < 1:
        raise ValidationError("min_cell must be >= 1")
    arr = np.asarray(column)
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.floor(arr)):
            raise ValidationError("column levels must be integers")
        arr = arr.astype(np.int64)
    if arr.size == 0 or arr.min() < 0:
        raise ValidationError("column levels must be nonnegative integers")
    k_max = int(arr.max())
    cuts = []
    for k in range(1, k_max + 1):
        below = int(np.count_nonzero(arr < k))
        if below >= min_cell and (arr.size - below) >= min_cell:
            cuts.append(k)
    if not cuts:
        raise NoAdmissibleCutoffError(
            f"no threshold leaves at least {min_cell} observations on each side"
        )
    return tuple(cuts)


@dataclass(frozen=True)
class OrdinalDesign:
    """Immutable n-by-J matrix of integer predictor levels.

    ``levels[j]`` is the maximum level K_j (values live in 0..K_j),
    ``sd[j]`` the sample standard deviation of column j, and ``cutoffs[j]``
    the ordered admissible thresholds, a nonempty subset of {1..K_j}.
    """

    x: np.ndarray
    cutoffs: tuple[tuple[int, ...], ...]
    levels: tuple[int, ...]
    sd: np.ndarray

    def __init__(self, x, cutoffs, levels=None):
        x = np.asarray(x)
        if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 1:
            raise ValidationError("design matrix must be 2-D with at least 2 rows and 1 column")
        if not np.issubdtype(x.dtype, np.integer):
            if not np.all(np.isfinite(x)) or not np.all(x == np.floor(x)):
                raise ValidationError("predictor levels must be integers")
        x = x.astype(np.int64)
        if x.min() < 0:
            raise ValidationError("predictor levels must be nonnegative")
        n, J = x.shape
        col_max = x.max(axis=0)
        if levels is None:
            levels = tuple(int(k) for k in col_max)
        else:
            levels = tuple(int(k) for k in levels)
            if len(levels) != J:
                raise DimensionMismatchError("levels must have one entry per predictor")
            for j in range(J):
                if col_max[j] > levels[j]:
                    raise ValidationError(f"column {j} exceeds its declared maximum level")
        cutoffs = tuple(tuple(int(k) for k in c) for c in cutoffs)
        if len(cutoffs) != J:
            raise DimensionMismatchError("cutoffs must have one entry per predictor")
        for j, cuts in enumerate(cutoffs):
            if len(cuts) == 0:
                raise ValidationError(f"column {j} has no admissible cutoffs")
            if any(c1 >= c2 for c1, c2 in zip(cuts, cuts[1:])):
                raise ValidationError(f"cutoffs for column {j} must be strictly increasing")
            if cuts[0] < 1 or cuts[-1] > levels[j]:
                raise ValidationError(f"cutoffs for column {j} must lie in 1..{levels[j]}")
        sd = np.empty(J)
        for j in range(J):
            try:
                sd[j] = column_sd(x[:, j])
            except ConstantColumnError as exc:
                raise ConstantColumnError(f"column {j} is constant") from exc
        x.flags.writeable = False
        sd.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "cutoffs", cutoffs)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "sd", sd)

    @classmethod
    def from_matrix(cls, x, min_cell: int = 5) -> "OrdinalDesign":
        """Build a design, deriving each column's cutoffs from a frequency screen."""
        x = np.asarray(x)
        if x.ndim != 2:
            raise ValidationError("design matrix must be 2-D")
        cutoffs = []
        for j in range(x.shape[1]):
            try:
                cutoffs.append(candidate_cutoffs(x[:, j], min_cell=min_cell))
            except NoAdmissibleCutoffError as exc:
                raise NoAdmissibleCutoffError(f"column {j}: {exc}") from exc
        return cls(x, tuple(cutoffs))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def J(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class TransformConfig:
    """Form of one predictor: linear (z=1) or thresholded at ``tau`` (z=0)."""

    z: int
    tau: Union[int, None] = None

    def __post_init__(self):
        if self.z not in (0, 1):
            raise ValidationError("z must be 0 or 1")
        if self.z == 0 and self.tau is None:
            raise ValidationError("a threshold is required when z=0")

    def validate_for(self, design: OrdinalDesign, j: int) -> None:
        if self.z == 0 and self.tau not in design.cutoffs[j]:
            raise ValidationError(
                f"tau={self.tau} is not an admissible cutoff for column {j}"
            )


def transform_predictor(design: OrdinalDesign, j: int, cfg: TransformConfig) -> np.ndarray:
    """Transformed column j: ``x/(2*sd)`` when z=1, else the indicator ``x < tau``."""
    cfg.validate_for(design, j)
    col = design.x[:, j]
    if cfg.z == 1:
        return col / (2.0 * design.sd[j])
    return (col < cfg.tau).astype(float)


def linear_predictor(
    design: OrdinalDesign,
    cfgs: Sequence[TransformConfig],
    alpha: float,
    beta,
) -> np.ndarray:
    """Linear predictor ``alpha + sum_j beta_j * f_j(x_j)`` over all rows."""
    beta = np.asarray(beta, dtype=float)
    if len(cfgs) != design.J or beta.shape != (design.J,):
        raise DimensionMismatchError("need one transform config and one coefficient per predictor")
    eta = np.full(design.n, float(alpha))
    for j, cfg in enumerate(cfgs):
        eta += beta[j] * transform_predictor(design, j, cfg)
    return eta


# ---------------------------------------------------------------------------
# Outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuousOutcome:
    y: np.ndarray
    kind = "continuous"

    def __init__(self, y):
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size == 0:
            raise ValidationError("outcome must be a nonempty 1-D array")
        if not np.all(np.isfinite(y)):
            raise ValidationError("continuous outcome contains non-finite values")
        y.flags.writeable = False
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.size


@dataclass(frozen=True)
class BinaryOutcome:
    y: np.ndarray
    kind = "binary"

    def __init__(self, y):
        y = np.asarray(y)
        if y.ndim != 1 or y.size == 0:
            raise ValidationError("outcome must be a nonempty 1-D array")
        if not np.all(np.isin(y, (0, 1))):
            raise ValidationError("binary outcome values must be 0 or 1")
        y = y.astype(np.int64)
        y.flags.writeable = False
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.size


@dataclass(frozen=True)
class SurvivalOutcome:
    time: np.ndarray
    event: np.ndarray
    kind = "survival"

    def __init__(self, time, event):
        time = np.asarray(time, dtype=float)
        event = np.asarray(event)
        if time.ndim != 1 or time.size == 0 or event.shape != time.shape:
            raise ValidationError("time and event must be matching nonempty 1-D arrays")
        if not np.all(np.isfinite(time)) or np.any(time <= 0):
            raise ValidationError("survival times must be strictly positive")
        if not np.all(np.isin(event, (0, 1))):
            raise ValidationError("event indicators must be 0 or 1")
        event = event.astype(np.int64)
        time.flags.writeable = False
        event.flags.writeable = False
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "event", event)

    @property
    def n(self) -> int:
        return self.time.size


Outcome = Union[ContinuousOutcome, BinaryOutcome, SurvivalOutcome]


def check_outcome_matches(design: OrdinalDesign, outcome: Outcome) -> None:
    if outcome.n != design.n:
        raise DimensionMismatchError(
            f"outcome has {outcome.n} rows but the design has {design.n}"
        )
