"""Exception types shared across the package.

Every error raised by threadmine derives from :class:`ThreadMineError`, so
callers (including the CLI) can catch one type and report a single-line
message.
"""

from __future__ import annotations


class ThreadMineError(Exception):
    """Base class for all threadmine errors."""


class CorpusError(ThreadMineError):
    """Malformed forum dump, label file, or corpus invariant violation."""


class EmbeddingError(ThreadMineError):
    """Embedding training, lookup, or serialization failure."""


class ProjectionError(ThreadMineError):
    """Thread projection failure, e.g. no in-vocabulary tokens.

    ``thread_id`` identifies the offending thread when known.
    """

    def __init__(self, message: str, thread_id: str | None = None):
        super().__init__(message)
        self.thread_id = thread_id


class IdentificationError(ThreadMineError):
    """Invalid keyword set or similarity-expansion input."""


class ClassificationError(ThreadMineError):
    """Classifier training or prediction failure."""


class MetricsError(ThreadMineError):
    """Invalid evaluation input (empty matrix, bad fold count, ...)."""


class ConfigError(ThreadMineError):
    """Unparseable or inconsistent pipeline configuration."""
