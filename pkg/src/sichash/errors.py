"""Exception types shared across the package."""


class SicHashError(Exception):
    """Base class for all errors raised by this package."""


class ConstructionError(SicHashError):
    """Building a data structure failed (seed space or budget exhausted)."""


class DeserializationError(SicHashError):
    """A serialized blob is malformed, truncated, or fails its checksum."""
