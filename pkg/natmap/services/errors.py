"""Error hierarchy shared by all services."""

from __future__ import annotations

from typing import Optional


class NatmapError(ValueError):
    """Base class for every failure raised by the natmap services."""


class InvalidPointError(NatmapError):
    """A vector is not a valid point, ideal point or isometry of the hyperboloid."""


class DimensionError(NatmapError):
    """Incompatible dimensions between inputs."""


class InadmissibleMeasureError(NatmapError):
    """A boundary measure has no barycenter (an atom carries weight >= 1/2)."""


class DegenerateMeasureError(NatmapError):
    """A measure came out empty or with zero mass."""


class ConvergenceError(NatmapError):
    """The barycenter solver ran out of iterations."""

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class DegenerateSupportError(NatmapError):
    """The form K of the implicit equation is numerically singular."""


class ResourceError(NatmapError):
    """An enumeration exceeded its work budget."""


class RelatorError(NatmapError):
    """A relator does not evaluate to the identity."""
