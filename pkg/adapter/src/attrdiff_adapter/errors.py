"""Exception hierarchy for the extraction adapter."""

__all__ = ["AdapterError", "ValidationError", "EncoderLoadError", "ExtractError"]


class AdapterError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(AdapterError, ValueError):
    """Bad arguments or malformed job configuration."""


class EncoderLoadError(AdapterError):
    """The requested encoder could not be constructed.

    Raised for unknown encoder names and for broken checkpoints.  This is
    always fatal: extraction never falls back to a different encoder.
    """


class ExtractError(AdapterError):
    """Extraction could not produce a usable output file."""
