"""Exception types shared across the package."""
from __future__ import annotations


class CtxGeomError(Exception):
    """Base class for all package errors."""


class DomainError(CtxGeomError, ValueError):
    """An argument lies outside the domain of the operation."""


class ValidationError(CtxGeomError, ValueError):
    """A scenario, behavior or file failed validation."""


class ResourceLimitError(CtxGeomError):
    """An enumeration or search would exceed its configured size cap."""


class UnsupportedGraphError(CtxGeomError):
    """The graph lies outside the class for which a method is exact."""


class NotApplicableError(CtxGeomError):
    """A closed form was requested outside its hypotheses."""


class SolverError(CtxGeomError, RuntimeError):
    """A numerical solver failed."""


class ConvergenceError(SolverError):
    """An iterative solver hit its iteration cap.

    ``gap`` holds the last certified optimality gap or residual.
    """

    def __init__(self, message: str, gap: float = float("nan"), iterations: int = 0):
        super().__init__(f"{message} (gap={gap:.3e}, iterations={iterations})")
        self.gap = gap
        self.iterations = iterations
