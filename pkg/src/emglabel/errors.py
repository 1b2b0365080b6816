"""Exception types raised across the package.

Everything derives from EmgLabelError so callers can catch the whole family;
most also derive from ValueError because they signal bad arguments or data.
"""


class EmgLabelError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(EmgLabelError, ValueError):
    """A parameter violates an operation's precondition."""


class InvalidInputError(EmgLabelError, ValueError):
    """Input data is unusable (empty, non-finite, wrong shape)."""


class DegenerateGeometryError(EmgLabelError, ValueError):
    """Joint points coincide; no angle is defined."""


class FormatError(EmgLabelError, ValueError):
    """A file or packet does not match its documented format."""


class DataError(EmgLabelError, ValueError):
    """Structurally valid file with semantically bad content."""


class PacketFormatError(FormatError):
    """A datagram payload could not be decoded."""


class UnmergeableError(EmgLabelError, ValueError):
    """Streams cannot be merged (e.g. no angle frames at all)."""


class InsufficientDataError(EmgLabelError, ValueError):
    """Stream too short for the requested scan window."""


class InsufficientBoundariesError(EmgLabelError, ValueError):
    """Fewer than two minima: no segment can be formed."""


class InternalConsistencyError(EmgLabelError, RuntimeError):
    """Pipeline produced indices that do not fit the data they refer to."""


class NormalizationError(EmgLabelError, ValueError):
    """A feature value lies outside the log-normalization domain."""


class InvalidTrainingSetError(EmgLabelError, ValueError):
    """Training data unusable for fitting (e.g. a single class)."""


class ConvergenceError(EmgLabelError, RuntimeError):
    """Optimizer failed to reach tolerance within its iteration budget."""


class ConfigError(EmgLabelError, ValueError):
    """Pipeline configuration failed validation."""
