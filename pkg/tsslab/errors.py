"""Exception hierarchy for tsslab."""

from typing import Optional


class TssError(Exception):
    """Base class for every error raised by tsslab."""


class UsageError(TssError):
    """Invalid arguments or configuration supplied by the caller."""


class ParseError(TssError):
    """Malformed input file."""

    def __init__(self, path: str, line_number: int, message: str):
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {message}")


class GraphValidationError(TssError):
    """A Graph violates one of its structural invariants."""


class SaturationError(TssError):
    """No candidate pairs remain for edge injection."""


class ConvergenceError(TssError):
    """Iterative solver did not reach the requested tolerance."""

    def __init__(self, message: str, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (residual={residual:.3e}, iterations={iterations})")


class SingularSystemError(TssError):
    """Linear system could not be factorised."""


class NoiseConfigError(TssError):
    """Invalid noise model request."""


class ShapeError(TssError):
    """Array shapes are inconsistent."""


class UndefinedStatisticError(TssError):
    """A statistic is undefined for the given input (zero variance, empty set)."""

    def __init__(self, message: str, statistic: Optional[str] = None):
        self.statistic = statistic
        super().__init__(message)
