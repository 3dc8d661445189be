"""Exception types shared across the toolkit."""
from __future__ import annotations


class InvalidParameterError(ValueError):
    """A numeric parameter is outside its admissible range."""


class UndefinedRatioError(ArithmeticError):
    """A measure ratio has a zero denominator."""

    def __init__(self, radius: float, message: str | None = None):
        self.radius = radius
        super().__init__(message or f"reference measure vanishes on the ball of radius {radius!r}")


class EvaluationError(RuntimeError):
    """A user-supplied oracle produced non-finite values."""

    def __init__(self, point, message: str | None = None):
        self.point = point
        super().__init__(message or f"non-finite map value near {list(map(float, point))}")


class MissingInverseError(RuntimeError):
    """An operation needs the inverse of a map and none was supplied."""


class BoundaryPointError(ValueError):
    """A point lies on the boundary of an open domain (zero distance to the complement)."""
