"""Shared exception types."""


class ConfigError(Exception):
    """Invalid or inconsistent run configuration (CLI exit code 2)."""


class NumericalError(Exception):
    """Linear solve or root find failed its tolerance (CLI exit code 3)."""
