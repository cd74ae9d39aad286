"""Exception types shared across the package."""


class QgError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(QgError, ValueError):
    """Array shapes do not line up for the requested operation."""


class DomainError(QgError, ValueError):
    """Input is outside the operation's domain (empty set, bad range, ...)."""


class VocabularyError(QgError, LookupError):
    """A symbol is not present in the relevant vocabulary."""


class ParseError(QgError, ValueError):
    """A data file could not be parsed; the message carries the line number."""


class AnnotationError(QgError, ValueError):
    """Copy-action annotation could not be completed."""


class RetrievalError(QgError, ValueError):
    """A retrieval baseline received a degenerate query."""


class ConfigError(QgError, ValueError):
    """Experiment configuration is missing or inconsistent."""


class CheckpointError(QgError, RuntimeError):
    """Checkpoint file problems."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint format version is not supported."""


class CheckpointIntegrityError(CheckpointError):
    """Checkpoint contents do not match their checksum."""
