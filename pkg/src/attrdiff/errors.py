"""Exception types shared across the package.

The CLI maps ``ValidationError`` (and subclasses) to exit code 2 and plain
``OSError`` to exit code 1; everything else is a bug.
"""


class AttrDiffError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(AttrDiffError, ValueError):
    """Invalid argument, configuration value, or input data."""


class MatrixFormatError(ValidationError):
    """A matrix, label, or model file does not conform to its format.

    Where possible the message names the offending position (row/column for
    delimited text, byte offset or element index for binary payloads).
    """


class DimensionMismatchError(ValidationError):
    """Two operands that must agree on row/column counts do not."""


class InsufficientSamplesError(ValidationError):
    """A requested split or selection needs more samples than are available."""
