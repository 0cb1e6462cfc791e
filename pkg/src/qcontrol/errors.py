"""Exception hierarchy.

Every error carries the CLI exit code it maps to, so the command line layer
can translate failures without a lookup table of its own.
"""


class QControlError(Exception):
    exit_code = 1


class GridError(QControlError, ValueError):
    exit_code = 2


class InvalidDimension(GridError):
    pass


class InvalidSize(GridError):
    pass


class NonPositiveLength(GridError):
    pass


class GridMismatch(QControlError, ValueError):
    pass


class NonFiniteValues(QControlError, ValueError):
    """Raised when a field or symbol contains NaN or Inf."""


class SupportViolation(QControlError, ValueError):
    """Field mass reaches the periodic boundary; coordinate multiplication is unreliable."""


class GeometryOverflow(QControlError, ValueError):
    """Control geometry does not fit inside the periodic box."""

    exit_code = 2


class MisalignedTrajectory(QControlError, ValueError):
    pass


class InvalidExponent(QControlError, ValueError):
    pass


class SmallnessViolation(QControlError, ValueError):
    """Data lies outside the configured small-data regime."""

    exit_code = 3


class BlowupDetected(QControlError, ArithmeticError):
    exit_code = 4


class ConvergenceError(QControlError, ArithmeticError):
    exit_code = 3


class CGStagnation(ConvergenceError):
    def __init__(self, message, ritz_min=None):
        super().__init__(message)
        self.ritz_min = ritz_min


class InconsistentFixedPoint(ConvergenceError):
    """The converged nonlinear iterate does not reproduce the prescribed initial state."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ObservabilityViolation(QControlError, ZeroDivisionError):
    """The observed energy underflows, so the observability ratio is undefined."""


class ConfigError(QControlError, ValueError):
    exit_code = 2

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class OutputError(QControlError, OSError):
    exit_code = 5
