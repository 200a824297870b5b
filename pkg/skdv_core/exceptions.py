"""Exception classes shared by the symbolic and numerical layers."""

from typing import Optional


class SkdvError(Exception):
    """Base exception for all derivation and simulation errors."""

    def __init__(
        self,
        message: str,
        details: Optional[str] = None,
    ):
        self.message = message
        self.details = details
        super().__init__(self.message)

    def __str__(self) -> str:
        parts = [self.message]
        if self.details:
            parts.append(f"({self.details})")
        return " ".join(parts)


class UnknownFieldError(SkdvError):
    """Raised when an expression references a field missing from the FieldTable."""

    pass


class ParityError(SkdvError):
    """Raised when an operation needs a parity-homogeneous value or matching parities."""

    pass


class NonlocalError(SkdvError):
    """Raised when a nonlocal atom appears where only local expressions are supported."""

    pass


class UnsupportedOperationError(SkdvError):
    """Raised for inputs outside the supported algebra (nonlinear velocities, odd Hessians)."""

    pass


class ConstraintError(SkdvError):
    """Raised when a constraint cannot be solved for a leading atom."""

    pass


class MultiplierSolveError(SkdvError):
    """Raised when a multiplier equation has a non-invertible operator kernel."""

    def __init__(
        self,
        message: str,
        kernel: Optional[str] = None,
        **kwargs,
    ):
        super().__init__(message, details=kernel, **kwargs)
        self.kernel = kernel


class IterationLimitError(SkdvError):
    """Raised when the constraint chain does not close within the generation cap."""

    pass


class ModelError(SkdvError):
    """Raised for unknown models or unsupported parameter values."""

    pass


class ConfigError(SkdvError):
    """Raised when a configuration file is missing or invalid."""

    pass


class NumericalError(SkdvError):
    """Raised when a simulation produces NaN/overflow."""

    def __init__(
        self,
        message: str,
        last_valid_time: Optional[float] = None,
        **kwargs,
    ):
        super().__init__(message, **kwargs)
        self.last_valid_time = last_valid_time
        self.last_valid_state = None


class DSLSyntaxError(SkdvError):
    """Raised by the expression parser; carries line and column of the offending token."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(message, details=f"line {line}, column {column}")
        self.line = line
        self.column = column
