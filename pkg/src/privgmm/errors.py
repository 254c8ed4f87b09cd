"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class UnsupportedDimensionError(ValueError):
    """The requested dimension is outside the supported range."""


class ConfigError(ValueError):
    """A configuration value is out of range or inconsistent."""
