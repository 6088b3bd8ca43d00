"""Exception types shared across the toolkit."""


class FwkitError(Exception):
    """Base class for toolkit errors."""


class ConfigError(FwkitError):
    """Invalid configuration. Message names the offending config path."""


class BlowUpError(FwkitError):
    """A trajectory became non-finite during integration."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"state became non-finite at step {step}")


class NoMonotonePathError(FwkitError):
    """No monotone connecting path exists for the requested travel time."""


class QuadratureError(FwkitError):
    """Adaptive quadrature failed to reach the requested tolerance."""
