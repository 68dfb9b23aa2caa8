"""Validated value types for points, tangent vectors and isometries."""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from natmap.services.errors import InvalidPointError
from natmap.services.geometry import hyperboloid as hyp


def frozen_array(value, ndim: int) -> np.ndarray:
    array = np.array(value, dtype=float)
    if array.ndim != ndim:
        raise ValueError(f"Expected a {ndim}-dimensional array, got shape {array.shape}")
    array.setflags(write=False)
    return array


class HPoint(BaseModel):
    coords: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("coords", mode="before")
    @classmethod
    def _on_hyperboloid(cls, value):
        array = frozen_array(value, 1)
        hyp.check_point(array, tol=1e-12 * max(1.0, float(array[0]) ** 2))
        return array


class HIsometry(BaseModel):
    """An element of O+(n, 1) read from input; the Minkowski form is checked to 1e-9."""

    matrix: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("matrix", mode="before")
    @classmethod
    def _lorentzian(cls, value):
        array = frozen_array(value, 2)
        hyp.check_isometry(array, tol=1e-9)
        return array


class HTangent(BaseModel):
    base: HPoint
    vec: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @model_validator(mode="before")
    @classmethod
    def _tangent(cls, data):
        base = data["base"]
        base_coords = base.coords if isinstance(base, HPoint) else np.asarray(base, dtype=float)
        vec = frozen_array(data["vec"], 1)
        scale = max(1.0, float(np.max(np.abs(base_coords))) * float(np.max(np.abs(vec))))
        if abs(float(hyp.mdot(base_coords, vec))) > 1e-12 * scale:
            raise InvalidPointError("Vector is not tangent to the hyperboloid at its base point")
        return {"base": base, "vec": vec}

    @property
    def norm(self) -> float:
        return float(hyp.tangent_norm(self.vec))
