"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the region where an operation is defined."""


class DivergenceError(ArithmeticError):
    """A required integral diverges.

    ``endpoint`` is ``"0"`` or ``"inf"`` and names where the integrand fails
    to be integrable.
    """

    def __init__(self, message: str, endpoint: str, exponent: float | None = None):
        super().__init__(message)
        self.endpoint = endpoint
        self.exponent = exponent


class ToleranceError(RuntimeError):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
