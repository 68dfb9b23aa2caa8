"""Schemas for natural-map evaluation, slice differentials and the Jacobian bound audit."""

from __future__ import annotations

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from natmap.schemas.cocycle import BoundaryMapSpec, Cocycle
from natmap.schemas.geometry import frozen_array
from natmap.schemas.measure import SphereQuadrature
from natmap.services.errors import DimensionError


class NaturalMapEvaluator(BaseModel):
    """Everything needed to evaluate F(a, x) = bar((phi_x)_* nu_a)."""

    cocycle: Cocycle
    boundary: BoundaryMapSpec
    quad: SphereQuadrature
    tol: float = 1e-10
    max_iter: int = 100

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @model_validator(mode="after")
    def _compatible(self):
        from natmap.services.cocycles.boundary_map import target_dim

        n, m = self.cocycle.source_dim, self.cocycle.target_dim
        if self.boundary.source_dim != n or self.quad.dim != n:
            raise DimensionError(f"Boundary map and quadrature must live on S^{n - 1}")
        if len(self.boundary.slices) != self.cocycle.space.size:
            raise DimensionError(
                f"Boundary map has {len(self.boundary.slices)} slices for {self.cocycle.space.size} points"
            )
        if target_dim(self.boundary) != m:
            raise DimensionError(f"Boundary slices do not land in S^{m - 1}")
        if self.tol <= 0:
            raise ValueError("Solver tolerance must be positive")
        return self

    @property
    def source_dim(self) -> int:
        return self.cocycle.source_dim

    @property
    def target_dim(self) -> int:
        return self.cocycle.target_dim


class SliceDifferential(BaseModel):
    """D_a F_x in the frames tangent_frame(a) and tangent_frame(F_x(a)), with the forms H', H, K."""

    base: np.ndarray
    x: int
    point: np.ndarray
    matrix: np.ndarray
    hp: np.ndarray
    h: np.ndarray
    k: np.ndarray
    delta: float
    residual: float

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("base", "point", mode="before")
    @classmethod
    def _vector(cls, value):
        return frozen_array(value, 1)

    @field_validator("matrix", "hp", "h", "k", mode="before")
    @classmethod
    def _matrix(cls, value):
        return frozen_array(value, 2)

    @property
    def source_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def target_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)


class BoundAudit(BaseModel):
    """Margins of each step of the chain bounding jac^p by 1; positive means the step holds."""

    p: int
    jacobian: float
    cs_operator_ratio: float
    cs_det_margin: float
    trace_margin: float
    chain_bound: float
    chain_margin: float
    b1_applicable: bool
    b1_margin: Optional[float] = None

    @property
    def holds(self) -> bool:
        margins = [self.cs_det_margin, self.trace_margin, self.chain_margin]
        if self.b1_applicable:
            margins.append(self.b1_margin)
        return min(margins) >= -1e-9 and self.cs_operator_ratio <= 1.0 + 1e-9
