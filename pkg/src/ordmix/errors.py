"""Exception types raised across the package."""


class OrdmixError(Exception):
    """Base class for all package errors."""


class ValidationError(OrdmixError):
    """Invalid user input: bad configuration value, malformed file, bad request."""


class ConstantColumnError(ValidationError):
    """A predictor column has zero variance."""


class InsufficientDataError(ValidationError):
    """Too few observations to compute the requested quantity."""


class NoAdmissibleCutoffError(ValidationError):
    """No threshold leaves at least ``min_cell`` observations on both sides."""


class DimensionMismatchError(ValidationError):
    """Array sizes are inconsistent with the design."""


class InvalidCorrelationError(ValidationError):
    """Requested equicorrelation does not define a valid covariance."""


class NumericalError(OrdmixError):
    """A sampler or summary step produced non-finite or degenerate values."""


class InsufficientChainsError(OrdmixError):
    """Fewer than two chains; between-chain diagnostics are undefined."""


class EmptyDrawsError(OrdmixError):
    """A draw store contains no samples."""


class TooManyConfigurationsError(OrdmixError):
    """The exact enumeration would exceed the configuration cap."""


class UnsupportedPenaltyError(OrdmixError):
    """The exact enumeration only supports unpenalized normal priors."""
