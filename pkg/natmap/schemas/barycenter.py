"""Schemas for barycenter solves."""

from __future__ import annotations

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from natmap.schemas.geometry import frozen_array


class BarycenterResult(BaseModel):
    """Minimizer of Lambda_nu with the g-norm of the gradient there."""

    point: np.ndarray
    residual: float
    iterations: int
    hessian_min_eig: float
    lambda_history: List[float] = []

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("point", mode="before")
    @classmethod
    def _point(cls, value):
        return frozen_array(value, 1)

    @property
    def dim(self) -> int:
        return self.point.shape[0] - 1

    def summary(self) -> dict:
        return {
            "point": [float(c) for c in self.point],
            "residual": self.residual,
            "iterations": self.iterations,
            "hessian_min_eig": self.hessian_min_eig,
            "lambda_history": list(self.lambda_history),
        }
