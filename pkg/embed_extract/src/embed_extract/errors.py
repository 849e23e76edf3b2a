"""Exception taxonomy, mirrored by the CLI exit codes.

ConfigError -> 2, DataError and children -> 3, ModelUnavailable -> 4.
A verification shortfall is a reported outcome, not an exception, and
exits 1.
"""


class ExtractorError(Exception):
    """Base class for everything raised on purpose."""


class ConfigError(ExtractorError):
    """Unusable settings: bad pooling name, nonpositive lengths."""


class DataError(ExtractorError):
    """Unusable input or output data."""


class BadMagic(DataError):
    pass


class Truncated(DataError):
    pass


class NonFinite(DataError):
    pass


class IdCollision(DataError):
    """Two distinct normalized texts hashed to the same id."""


class ModelUnavailable(ExtractorError):
    """The encoder checkpoint could not be loaded."""
