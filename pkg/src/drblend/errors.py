"""Exception hierarchy shared by every module in the package.

The CLI maps these onto process exit codes: ``ConfigError`` -> 2,
``DataError`` (and subclasses) -> 3, ``WriteError`` and plain OS-level
failures -> 4.
"""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(PipelineError):
    """Invalid, incomplete, or contradictory configuration."""

    exit_code = 2


class DataError(PipelineError):
    """Malformed, corrupt, or internally inconsistent data."""

    exit_code = 3


class AlignmentError(DataError):
    """Modality files do not share one label sequence / row ordering."""


class FileFormatError(DataError):
    """A binary container failed validation (bad magic, truncation)."""


class WriteError(PipelineError):
    """An output file could not be written."""

    exit_code = 4
