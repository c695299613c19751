"""Exception types raised by the solver."""


class SBIError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGridError(SBIError, ValueError):
    pass


class InvalidExponentError(SBIError, ValueError):
    pass


class IncompatibleFieldsError(SBIError, ValueError):
    pass


class InvalidFieldError(SBIError, ValueError):
    """Field values are non-finite."""


class ConstraintViolationError(SBIError, ValueError):
    pass


class ParameterError(SBIError, ValueError):
    pass


class UndefinedRatioError(SBIError, ValueError):
    pass


class OracleError(SBIError, RuntimeError):
    """The field oracle did not converge.

    The last iterate and the final gradient norm are attached so callers can
    inspect how far the descent got.
    """

    def __init__(self, message, last_iterate=None, grad_norm=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.grad_norm = grad_norm


class ProjectionError(SBIError, RuntimeError):
    """No sign change of the Nehari residual was found along the ray."""
