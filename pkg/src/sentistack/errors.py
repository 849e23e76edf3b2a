"""Exception hierarchy.

Three families map onto the CLI exit codes: configuration problems (2),
data problems (3), training failures (4). Everything raised on purpose by
this package derives from SentistackError.
"""


class SentistackError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SentistackError):
    """Invalid configuration: bad flag values, unknown parameters, bad combinations."""

    exit_code = 2


class DataError(SentistackError):
    """Invalid input data: corpora, label strings, embedding files, bundles."""

    exit_code = 3


class TrainingError(SentistackError):
    """Training could not proceed or produced non-finite state."""

    exit_code = 4


# -- corpus / split errors ---------------------------------------------------

class MissingColumn(DataError):
    """A required column is absent from the input table."""


class UnknownLabel(DataError):
    """A label string is not one of the recognized aliases."""


class TooFewPerClass(DataError):
    """A stratified split needs at least two documents in every present class."""


class KTooLarge(ConfigError):
    """More folds (or neighbors) requested than there are documents."""


# -- feature errors ----------------------------------------------------------

class EmptyVocabulary(DataError):
    """No token survived the document-frequency filter."""


class MissingEmbedding(DataError):
    """A document id has no row in the embedding table."""


class LengthMismatch(DataError):
    """Two aligned sequences have different lengths."""


class DimMismatch(DataError):
    """A vector's width disagrees with the fitted width."""


# -- embedding file errors ---------------------------------------------------

class BadMagic(DataError):
    """The file does not start with the expected magic bytes."""


class NonFinite(DataError):
    """A stored value is NaN or infinite."""


class Truncated(DataError):
    """The file ends before the declared payload does."""


# -- training errors ---------------------------------------------------------

class SingleClass(TrainingError):
    """Training labels contain fewer than two distinct classes."""


class NonFiniteLoss(TrainingError):
    """The training loss or gradient became NaN or infinite."""


class DegenerateStage(TrainingError):
    """The first boosting stage cannot beat chance."""


# -- configuration errors ----------------------------------------------------

class UnknownParameter(ConfigError):
    """A hyperparameter key is not recognized for the chosen model."""


class FeatureSetMismatch(ConfigError):
    """A bundle's feature set disagrees with what the command supplies."""
