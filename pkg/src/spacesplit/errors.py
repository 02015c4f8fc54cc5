"""Exception types shared across the package."""


class SpaceSplitError(Exception):
    """Base class for all package errors."""


class InvalidStateError(SpaceSplitError):
    """A state left the map's domain (NaN/inf coordinate)."""


class DegenerateTangentError(SpaceSplitError):
    """The pushed-forward unstable vector collapsed (||dphi q|| ~ 0)."""


class ConfigError(SpaceSplitError):
    """A run configuration failed validation."""
