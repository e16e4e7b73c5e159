"""Exception types raised across the package."""


class SaemlogitError(Exception):
    """Base class for all library errors."""


class SchemaError(SaemlogitError):
    """Dataset or config violates the declared variable schema."""


class DataError(SaemlogitError):
    """A concrete data file or cell is invalid (carries row/column identity)."""


class NumericsError(SaemlogitError):
    """A numerical precondition failed (non-SPD covariance, separation, ...)."""


class EnumerationCapError(SaemlogitError):
    """The product space of missing discrete levels exceeds the configured cap."""
