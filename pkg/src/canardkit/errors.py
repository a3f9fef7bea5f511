"""Exception hierarchy shared by all modules."""


class CanardkitError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CanardkitError, ValueError):
    """Invalid input parameters or configuration."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class GeometryError(CanardkitError):
    """Critical-manifold geometry violates an assumption (fold count, brackets)."""


class DegenerateFoldError(GeometryError):
    """A fold point is degenerate, so the canard analysis does not apply."""


class SmallDenominatorError(CanardkitError, ArithmeticError):
    """A normal-form denominator is numerically zero."""


class NumericalError(CanardkitError):
    """Integration or root finding failed."""


class IntegrationError(NumericalError):
    """The ODE integrator stopped before reaching the requested time."""


class InvariantViolation(NumericalError):
    """A simulated state left the positive quadrant or the boundedness box."""


class NoCycleError(NumericalError):
    """Cycle detection did not settle within the transient budget."""


class SectionMissError(NumericalError):
    """The trajectory never crossed the Poincare section."""
