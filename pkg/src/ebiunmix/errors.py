"""Exception types shared across the toolkit.

Everything derives from ValueError or RuntimeError so callers that do not
care about the fine-grained type can still catch the builtin.
"""


class InvalidInputError(ValueError):
    """Input violates a structural requirement (non-finite, wrong value, asymmetric...)."""


class InsufficientDataError(ValueError):
    """Not enough samples/rows for the requested operation."""


class DimensionError(ValueError):
    """Shapes do not conform to the operation's contract."""


class JacobiConvergenceError(RuntimeError):
    """Jacobi eigensolver did not reach the off-diagonal threshold."""

    def __init__(self, message: str, sweeps: int):
        super().__init__(message)
        self.sweeps = sweeps


class FilterDesignError(ValueError):
    """Filter design parameters are unrealizable (e.g. cutoff at/above Nyquist)."""


class FilterStabilityError(ValueError):
    """Filter coefficients have poles on or outside the unit circle."""


class DegenerateComponentError(ValueError):
    """A retained component has (numerically) zero variance."""

    def __init__(self, message: str, component: int):
        super().__init__(message)
        self.component = component


class NonWhiteInputError(ValueError):
    """Data handed to FastICA is not whitened to the required tolerance."""


class UndefinedCorrelationError(ValueError):
    """Correlation requested against a zero-variance signal."""


class CsvFormatError(ValueError):
    """Malformed CSV input; carries the offending line number (1-based)."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number
