"""Exception types shared across the toolkit."""


class TexbenchError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(TexbenchError, ValueError):
    """An argument violates an operation's contract."""


class InvalidGeometryError(InvalidInputError):
    """Patch/canvas geometry is inconsistent (e.g. patch larger than canvas,
    patch position outside the canvas)."""


class CoverageError(TexbenchError):
    """A canvas pixel received no splat weight during decoding."""


class CorruptFormatError(TexbenchError, ValueError):
    """A file does not conform to its declared on-disk format."""


class UndefinedMetricError(TexbenchError):
    """A metric has no defined value for the given inputs (e.g. a label map
    with no regions)."""


class ConfigurationError(TexbenchError):
    """Bad or contradictory run configuration."""
