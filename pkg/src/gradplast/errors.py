"""Exception types shared across the package."""


class GradplastError(Exception):
    """Base class for all package-specific errors."""


class InvalidSlipSystem(GradplastError):
    """Slip direction / plane normal violate unit-norm or orthogonality."""


class DimensionMismatch(GradplastError):
    """A field or slip vector does not match the expected shape."""


class InvalidModel(GradplastError):
    """Material parameters are invalid on their own or inconsistent with
    the chosen slip basis (e.g. Prager hardening on skew systems)."""


class NonConvergence(GradplastError):
    """Incremental solve hit its iteration cap before meeting tolerances.

    Carries the last diagnostic report in ``report`` so callers can inspect
    the residuals that were still outstanding.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class CGStall(GradplastError):
    """Conjugate gradients plateaued or hit its cap; carries a condition
    number estimate of the operator in ``condition_estimate``."""

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class NoConsistentPattern(GradplastError):
    """Active-set enumeration found no self-consistent sign pattern.

    Convexity guarantees one exists, so this always signals a bug.
    """


class NonMonotoneLoad(GradplastError):
    """The closed-form single-slip solution requires monotone loading."""


class ParseError(GradplastError):
    """Scenario text could not be parsed."""


class ValidationError(GradplastError):
    """Scenario parsed but violates a model constraint."""
