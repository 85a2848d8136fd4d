"""Domain Exceptions

Exception hierarchy shared by every layer of measure_lab.
"""

from typing import Any, Optional


class MeasureLabError(Exception):
    """Base class for all measure_lab errors."""


class GridMismatchError(MeasureLabError, ValueError):
    """Raised when two fields or a field and an operator live on different grids."""


class MonotonicityViolationError(MeasureLabError, ValueError):
    """Raised when a nonlinearity increases in u on the certification lattice."""

    def __init__(self, message: str, max_violation: float = 0.0) -> None:
        super().__init__(message)
        self.max_violation = max_violation


class PreconditionError(MeasureLabError, ValueError):
    """Raised when an operation is called outside its documented domain."""


class LinearSolveError(MeasureLabError, RuntimeError):
    """Raised when a sparse solve fails or misses its residual target."""

    def __init__(self, message: str, residual: float = float("nan")) -> None:
        super().__init__(message)
        self.residual = residual


class NonConvergedError(MeasureLabError, RuntimeError):
    """Raised when the semilinear solver exhausts its iteration budget.

    Attributes:
        report: Last SolveReport (converged=False) with the final iterate
    """

    def __init__(self, message: str, report: Any = None) -> None:
        super().__init__(message)
        self.report = report


class SequenceNotConvergedError(MeasureLabError, RuntimeError):
    """Raised when a truncation or mollification ladder is not Cauchy in L¹.

    Attributes:
        result: Partial ReductionResult carrying the full trace
    """

    def __init__(self, message: str, result: Any = None) -> None:
        super().__init__(message)
        self.result = result


class ConfigError(MeasureLabError, ValueError):
    """Raised for malformed experiment configuration.

    Attributes:
        key: Dotted path of the offending key, if known
    """

    def __init__(self, message: str, key: Optional[str] = None) -> None:
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class ExpressionError(ConfigError):
    """Raised when an expression does not parse under the documented grammar."""
