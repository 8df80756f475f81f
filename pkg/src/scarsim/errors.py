"""Shared exception types."""


class CapacityError(RuntimeError):
    """Raised when a dense computation would exceed the configured size cap."""


class ConfigError(ValueError):
    """Raised for malformed or unknown configuration input."""
