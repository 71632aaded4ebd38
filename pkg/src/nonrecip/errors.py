"""Exception types raised across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class CalibrationError(RuntimeError):
    """A calibration root-find could not bracket a solution."""


class NumericalError(RuntimeError):
    """A numerical solve failed (singular system, unstable grid, ...)."""


class GridError(NumericalError):
    """Discretisation too coarse for the requested simulation.

    ``suggestion`` carries a dict of grid settings that would satisfy the check.
    """

    def __init__(self, message, suggestion=None):
        super().__init__(message)
        self.suggestion = suggestion or {}


class ConfigError(ValueError):
    """Configuration validation failure, with the offending line when known."""

    def __init__(self, message, line=None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
