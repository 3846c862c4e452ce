"""Exception taxonomy.

Errors a caller can act on get their own class; the CLI maps ConfigError
and UsageError to exit code 2, everything else raised here to exit code 1.
"""

from __future__ import annotations


class SevenPointError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SevenPointError):
    """Invalid configuration value or combination."""


class ContractError(SevenPointError, ValueError):
    """An operation was called outside its documented preconditions."""


class SchemaError(SevenPointError):
    """Input file is missing a required column or header."""


class MappingError(SevenPointError):
    """A categorical label string has no entry in the mapping table."""


class DuplicateIdError(SevenPointError):
    """Two rows share a case id."""


class IncompleteDataError(SevenPointError):
    """A case referenced in metadata is missing from the feature file."""


class DimensionError(SevenPointError):
    """Feature vectors disagree on dimensionality."""


class FormatError(SevenPointError):
    """A file does not parse under its documented format."""


class InsufficientDataError(SevenPointError):
    """Not enough observations to estimate the requested quantity."""


class IsolatedNodeError(SevenPointError):
    """A graph node has no outgoing candidate edges."""


class UndefinedMetricError(SevenPointError):
    """Metric is undefined for the given inputs (e.g. single-class AUC)."""


class NumericalError(SevenPointError):
    """A non-finite value appeared during numeric computation."""


class CheckpointFormatError(FormatError):
    """Checkpoint file is corrupt or has an unsupported version."""


class IsolatedNodeWarning(UserWarning):
    """Graph construction left one or more nodes without edges."""


class DuplicateWordWarning(UserWarning):
    """A word-vector file defines the same word twice; last wins."""
