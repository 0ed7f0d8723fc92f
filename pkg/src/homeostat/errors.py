"""Exception hierarchy shared by every module."""


class HomeostatError(Exception):
    """Base class for all simulator errors."""


class DomainError(HomeostatError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class NonPhysicalError(HomeostatError, ArithmeticError):
    """An exponent exceeded the configured cap; the parameters are not physical."""

    def __init__(self, message, t=None):
        if t is not None:
            message = f"{message} (at t={t!r} s)"
        super().__init__(message)
        self.t = t


class CalibrationError(HomeostatError, ValueError):
    """A calibration target cannot be met by any admissible parameter value."""


class ConfigError(HomeostatError, ValueError):
    """A scenario or parameter block is invalid.

    ``field`` names the offending entry, as a dotted path when known.
    """

    def __init__(self, message, field=None):
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
