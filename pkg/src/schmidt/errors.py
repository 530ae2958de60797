"""Exception hierarchy shared by all modules."""


class SchmidtError(Exception):
    """Base class for library errors (runtime failures at the CLI)."""


class ValidationError(SchmidtError, ValueError):
    """Bad input detected before any computation."""
