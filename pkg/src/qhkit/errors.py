"""Exception types shared across the toolkit."""


class QhkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(QhkitError, ValueError):
    """Malformed or out-of-contract argument (NaN coordinates, bad ranges, ...)."""


class ArcExitsDomainError(QhkitError):
    """An arc or segment sample point has nonpositive boundary distance."""


class NotConnectedError(QhkitError):
    """Endpoints lie in different components of the path graph."""


class SamplingExhaustedError(QhkitError):
    """Rejection sampling acceptance rate fell below the trial budget."""


class DegenerateDomainError(QhkitError):
    """Domain discretization produced no usable interior nodes."""


class UndefinedRatioError(QhkitError):
    """A ratio-type constant was requested for coincident endpoints."""


class ConfigError(QhkitError):
    """Experiment configuration failed to parse or validate."""
