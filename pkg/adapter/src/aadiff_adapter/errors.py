class AdapterError(Exception):
    """Base class for adapter failures."""


class ModelLoadError(AdapterError):
    """A foundation model (or its weights) is unavailable."""


class InjectionError(AdapterError):
    """A schedule cannot be applied to the loaded backend."""


class ScheduleFormatError(AdapterError):
    """Schedule JSON does not match the documented wire format."""
