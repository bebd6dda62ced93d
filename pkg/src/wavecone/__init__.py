"""Radiation fields, exterior energies and non-radiative kernel spaces for the linear wave equation."""

__version__ = "0.1.0"

from .errors import ConfigError, PreconditionError, ResolutionError, WaveconeError  # noqa: E402

__all__ = ["__version__", "ConfigError", "PreconditionError", "ResolutionError", "WaveconeError"]
