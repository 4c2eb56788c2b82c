"""Exception types shared across the package."""


class NlsLabError(Exception):
    """Base class for all nlslab errors."""


class ResolutionError(NlsLabError):
    """Field or operator request is not resolved on the given grid.

    Raised for boundary-mass violations ("domain too small"), spectral-tail
    violations ("under-resolved"), and semidiscrete-transform aliasing.
    """


class SolverError(NlsLabError):
    """Time integration aborted (mass drift, boundary guard, bad config)."""


class ConfigError(NlsLabError):
    """Invalid or unknown experiment configuration."""
