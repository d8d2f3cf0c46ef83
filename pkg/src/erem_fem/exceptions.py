"""Exception hierarchy for erem-fem."""

from typing import Any


class EremError(Exception):
    """Base exception for all erem-fem errors."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ValidationError(EremError):
    """Raised when input validation fails."""

    def __init__(
        self,
        message: str,
        field: str | None = None,
        value: Any | None = None,
        details: dict | None = None,
    ):
        super().__init__(message, details)
        self.field = field
        self.value = value


class CoefficientError(ValidationError):
    """Raised when a diffusion tensor fails the ellipticity sample check."""

    pass


class InsufficientDataError(ValidationError):
    """Raised when an order fit has too few usable rows."""

    pass


class ConfigError(ValidationError):
    """Raised when a run configuration cannot be parsed or violates a constraint."""

    def __init__(
        self,
        message: str,
        field: str | None = None,
        value: Any | None = None,
        line: int | None = None,
        column: int | None = None,
        details: dict | None = None,
    ):
        super().__init__(message, field=field, value=value, details=details)
        self.line = line
        self.column = column


class SolverError(EremError):
    """Raised when an iterative linear solve does not converge."""

    def __init__(
        self,
        message: str,
        stage: str | None = None,
        iterations: int | None = None,
        residual: float | None = None,
        details: dict | None = None,
    ):
        super().__init__(message, details)
        self.stage = stage
        self.iterations = iterations
        self.residual = residual


class KrylovConvergenceError(SolverError):
    """Raised when a Krylov matrix-function action exhausts its substep budget."""

    def __init__(
        self,
        message: str,
        substeps: int,
        error_estimate: float | None = None,
        details: dict | None = None,
    ):
        super().__init__(message, stage="krylov", residual=error_estimate, details=details)
        self.substeps = substeps


class MatrixFunctionError(EremError):
    """Raised when a dense matrix function overflows or produces non-finite entries."""

    pass


class BlowUpError(EremError):
    """Raised when a state or nonlinearity evaluation becomes non-finite."""

    pass


class IntegrationError(EremError):
    """Raised when a time step fails; carries the failing step index."""

    def __init__(
        self,
        message: str,
        step_index: int,
        time: float | None = None,
        details: dict | None = None,
    ):
        super().__init__(message, details)
        self.step_index = step_index
        self.time = time
