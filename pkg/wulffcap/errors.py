"""Exception hierarchy shared by every wulffcap module.

Each failure mode named by an operation maps onto exactly one class here, so
callers (and the CLI) can catch :class:`WulffcapError` and still branch on the
specific cause when they care.
"""
from __future__ import annotations


class WulffcapError(Exception):
    """Root of all library errors."""


class DomainError(WulffcapError, ValueError):
    """Input lies outside the domain of an operation."""


class AdmissibilityError(DomainError):
    """The support function does not describe a smooth strictly convex Wulff shape."""


class EvaluationError(WulffcapError):
    """A numeric evaluation produced NaN or failed to converge."""

    def __init__(self, message: str, *, lower_bound: float | None = None) -> None:
        super().__init__(message)
        self.lower_bound = lower_bound


class ConstructionError(WulffcapError):
    """A catalog surface could not be built from the requested data."""


class MeshQualityError(WulffcapError):
    """Discrete geometry is under-resolved (e.g. an asymmetric shape operator)."""

    def __init__(self, message: str, *, asymmetry: float) -> None:
        super().__init__(message)
        self.asymmetry = asymmetry


class CurvatureError(WulffcapError):
    """Curvature data is not real or not positive where convexity is required."""


class ConsistencyError(WulffcapError):
    """Two computations that must agree algebraically do not."""


class InvariantViolationError(WulffcapError):
    """A structural invariant (positivity, tangency) failed at some node."""


class QuadratureError(WulffcapError):
    """A quadrature sum met a non-finite node value."""

    def __init__(self, message: str, *, node: int) -> None:
        super().__init__(message)
        self.node = node


class NonConvergenceError(WulffcapError):
    """An iterative solver stopped without meeting its tolerance."""

    def __init__(self, message: str, *, residual: float, iterations: int) -> None:
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class UsageError(WulffcapError):
    """Unknown catalog name or malformed command-line request."""
