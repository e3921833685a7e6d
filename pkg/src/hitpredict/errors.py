"""Exception hierarchy.

The CLI maps these onto exit codes: :class:`DataError` (and subclasses) to 2,
:class:`InvariantError` to 3. Usage errors are raised by the argument parser.
"""


class HitPredictError(Exception):
    """Base class for all package errors."""


class DataError(HitPredictError):
    """Input data is unusable: bad format, empty joins, missing classes."""


class FormatError(DataError):
    """A file does not follow its expected layout (header, columns)."""


class RejectedRecordError(DataError):
    """A single record cannot be turned into a valid domain object."""


class EmptyTextError(RejectedRecordError):
    """A string normalized to nothing."""


class TrainingError(DataError):
    """A learner's preconditions on its training rows are not met."""


class InvariantError(HitPredictError):
    """An internal invariant was violated; indicates a bug, not bad input."""
