"""Exception types shared across the package."""


class BridgeTrackError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(BridgeTrackError):
    """Array shapes or dimensions are inconsistent with the operation."""


class NotPositiveDefinite(BridgeTrackError):
    """A matrix required to be symmetric positive definite is not."""


class EmptyFreeBlock(BridgeTrackError):
    """Conditioning was asked to observe every dimension of a density."""


class InvalidParameter(BridgeTrackError):
    """A scalar or structural parameter is outside its admissible range."""


class IndexOutOfRange(BridgeTrackError):
    """A time index falls outside the model horizon."""


class TooLarge(BridgeTrackError):
    """A brute-force verification path was asked to exceed its size guard."""


class HorizonExceeded(BridgeTrackError):
    """A filtering or prediction step would move past the model horizon."""


class PreconditionViolated(BridgeTrackError):
    """A check was invoked on a model that fails its prerequisite property."""


class ConfigError(BridgeTrackError):
    """Base class for configuration problems (maps to CLI exit code 2)."""


class ParseError(ConfigError):
    """A config file line could not be parsed."""


class InvalidConfig(ConfigError):
    """A config object violates the scenario contract."""


class ValidationError(InvalidConfig):
    """A parsed config value is structurally valid but semantically wrong."""
