"""Exception types shared across the package.

Every error the library raises deliberately subclasses SwarmSumError, so
callers (and the CLI) can map failures to a stable category name:
``type(exc).__name__`` with the ``Error`` suffix dropped.
"""


class SwarmSumError(Exception):
    """Base class for all deliberate errors raised by this package."""

    @property
    def category(self) -> str:
        name = type(self).__name__
        return name[:-5] if name.endswith("Error") else name


# corpus
class MalformedStoryError(SwarmSumError):
    pass


class EmptyArticleError(SwarmSumError):
    pass


class IoFailureError(SwarmSumError):
    pass


class NoDocumentsError(SwarmSumError):
    pass


class BadFractionsError(SwarmSumError):
    pass


# analyze / vocab
class EmptyCorpusError(SwarmSumError):
    pass


class UncleanedDocumentError(SwarmSumError):
    pass


class ZeroMaxlenError(SwarmSumError):
    pass


class UnknownIdError(SwarmSumError):
    pass


class DimMismatchError(SwarmSumError):
    pass


# numcore
class EmptyInputError(SwarmSumError):
    pass


class ShapeMismatchError(SwarmSumError):
    pass


class BadRangeError(SwarmSumError):
    pass


class LengthMismatchError(SwarmSumError):
    pass


# models
class IndexOutOfRangeError(SwarmSumError):
    pass


class OddDimError(SwarmSumError):
    pass


class ConfigMismatchError(SwarmSumError):
    pass


class DigestMismatchError(SwarmSumError):
    pass


# optim
class BadConfigError(SwarmSumError):
    pass


class EmptyBatchError(SwarmSumError):
    pass


# cli
class LineCountMismatchError(SwarmSumError):
    pass
