"""Shared exception types."""


class NonconvergenceError(RuntimeError):
    """An inner or outer iteration hit its cap before reaching tolerance."""


class ConfigError(ValueError):
    """A configuration file or mapping is missing or invalid; the message
    names the offending field or path."""
