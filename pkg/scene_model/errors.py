"""
Error Types

Exception hierarchy shared by every package. Each error subclasses the
built-in family a caller would naturally catch (ValueError for bad inputs,
RuntimeError for algorithmic failures).
"""

from typing import Optional


class ConfigError(ValueError):
    """Invalid configuration value or unsupported configuration combination."""


class DomainError(ValueError):
    """Argument outside its mathematical domain (e.g. an angle beyond +/-90 deg)."""


class ShapeError(ValueError):
    """Array length or shape does not match what the operation expects."""


class InfiniteRatioError(ValueError):
    """A power ratio was requested against zero noise."""


class DegenerateColumnError(ValueError):
    """A sensing-matrix column has zero norm, so correlations are undefined."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"Sensing matrix column {column} has zero norm")


class InfeasibleTargetError(ValueError):
    """Calibration targets cannot be met with the available degrees of freedom."""


class InfeasibleStartError(RuntimeError):
    """Stage-1 initialization ended above the orthogonality threshold."""

    def __init__(self, best_metric: float, threshold: float):
        self.best_metric = best_metric
        self.threshold = threshold
        super().__init__(
            f"Initialization reached orthogonality metric {best_metric:.6g}, "
            f"above threshold {threshold:.6g}"
        )


class NumericalFailureError(RuntimeError):
    """A decoder message became non-finite."""

    def __init__(self, iteration: int, detail: Optional[str] = None):
        self.iteration = iteration
        message = f"Non-finite message at decoder iteration {iteration}"
        if detail:
            message += f": {detail}"
        super().__init__(message)
