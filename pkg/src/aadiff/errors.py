"""Exception hierarchy shared by all aadiff modules."""


class AadiffError(Exception):
    """Base class for every error raised by this package."""


class DecodeError(AadiffError):
    """Malformed or truncated audio container."""


class UnsupportedFormat(AadiffError):
    """Audio container is valid but uses a codec we do not handle."""


class EmptyAudio(AadiffError):
    """Audio stream contains zero samples."""


class InvalidFps(AadiffError):
    """Frame rate is not a positive finite number."""


class GridMismatch(AadiffError):
    """Series or grids that must agree in length/fps do not."""


class InvalidWindow(AadiffError):
    """Smoothing window size is not a positive integer."""


class FormatError(AadiffError):
    """A structured input file violates its documented schema."""


class DegenerateEmbedding(AadiffError):
    """An embedding vector is all-zero and cannot be scored."""


class DimensionError(AadiffError):
    """Vector or grid dimensions do not line up."""


class EmptySchedule(AadiffError):
    """A schedule was requested with no edit sources."""


class ValidationError(AadiffError):
    """A value violates a domain invariant (negative multiplier, bad range...)."""


class ConfigError(AadiffError):
    """Run configuration is incomplete or inconsistent."""


class DegenerateSeries(AadiffError):
    """A metric series is constant or too short to correlate."""


class WriteError(AadiffError):
    """Failed to write an output file."""
