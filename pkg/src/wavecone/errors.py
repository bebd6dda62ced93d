"""Exception types shared across the package.

The CLI maps ``ConfigError`` to exit code 2 and ``PreconditionError`` to
exit code 3.
"""


class WaveconeError(Exception):
    """Base class for library errors."""


class ConfigError(WaveconeError, ValueError):
    """Malformed or inconsistent configuration."""


class PreconditionError(WaveconeError, ValueError):
    """A numerical precondition of an operation does not hold."""


class ResolutionError(PreconditionError):
    """The chosen grid does not resolve the requested quantity."""
