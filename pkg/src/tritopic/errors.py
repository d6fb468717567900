"""Exception types shared across the pipeline."""


class TritopicError(Exception):
    """Base class for all engine errors."""


class ParseError(TritopicError):
    """A file could not be parsed (message carries the line number)."""


class ValidationError(TritopicError):
    """An input record violates an invariant."""


class AlignmentError(TritopicError):
    """Row count of a matrix does not match the segment count."""


class DataError(TritopicError):
    """Numeric payload is malformed (NaN/Inf, bad shape)."""


class DimensionError(TritopicError):
    """Vector or matrix dimensions are incompatible."""


class ConfigError(TritopicError):
    """Run configuration is missing or inconsistent."""


class InputError(TritopicError):
    """A raw input (image, payload) is unusable."""


class StageError(TritopicError):
    """A pipeline stage failed for one video; the run continues."""
