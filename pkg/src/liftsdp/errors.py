"""Exception types shared across the package."""


class LiftSdpError(Exception):
    """Base class for package errors."""


class InputError(LiftSdpError):
    """Bad user input: malformed DSL, invalid signature, infeasible parameters."""


class DslSyntaxError(InputError):
    """DSL parse failure, with 1-based line/column position."""

    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class BallSizeError(LiftSdpError):
    """Predicted ball size exceeds the configured vertex cap."""


class DimensionError(LiftSdpError):
    """Problem dimension exceeds a dense-path or brute-force cutoff."""


class ConvergenceError(LiftSdpError):
    """An iterative solver failed to reach its tolerance.

    Carries whatever partial result was available at failure time.
    """

    def __init__(self, message, best_value=None, best_residual=None):
        super().__init__(message)
        self.best_value = best_value
        self.best_residual = best_residual
