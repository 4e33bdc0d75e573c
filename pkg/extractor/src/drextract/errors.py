"""Exception hierarchy mirroring the CLI exit codes."""


class ExtractError(Exception):
    """Base class; anything unclassified exits 1."""

    exit_code = 1


class ConfigError(ExtractError):
    """Bad model name, flag, or argument (exit 2)."""

    exit_code = 2


class DataError(ExtractError):
    """Unreadable image, missing label, malformed CSV (exit 3)."""

    exit_code = 3


class WriteError(ExtractError):
    """Filesystem failure on read or write (exit 4)."""

    exit_code = 4
