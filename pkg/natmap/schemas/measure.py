"""Schemas for boundary quadratures and finite atomic boundary measures."""

from __future__ import annotations

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from natmap.schemas.geometry import frozen_array
from natmap.services.errors import DegenerateMeasureError, InadmissibleMeasureError
from natmap.services.geometry import hyperboloid as hyp

NORMALIZATION_TOL = 1e-12


class SphereQuadrature(BaseModel):
    nodes: np.ndarray
    weights: np.ndarray
    order: int

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("nodes", mode="before")
    @classmethod
    def _ideal_nodes(cls, value):
        array = frozen_array(value, 2)
        hyp.check_ideal_point(array)
        return array

    @field_validator("weights", mode="before")
    @classmethod
    def _probability_weights(cls, value):
        array = frozen_array(value, 1)
        if np.any(array <= 0.0) or abs(float(np.sum(array)) - 1.0) > 1e-12:
            raise ValueError("Quadrature weights must be positive and sum to 1")
        return array

    @property
    def dim(self) -> int:
        return self.nodes.shape[1] - 1

    @property
    def size(self) -> int:
        return self.nodes.shape[0]


class BoundaryMeasure(BaseModel):
    """Finite atomic measure on the boundary sphere, atoms stored as normalized ideal points."""

    points: np.ndarray
    weights: np.ndarray
    normalized: bool = True
    mass: Optional[float] = None

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("points", mode="before")
    @classmethod
    def _ideal_atoms(cls, value):
        array = np.array(value, dtype=float)
        if array.ndim != 2 or array.shape[0] == 0:
            raise InadmissibleMeasureError("A boundary measure needs at least one atom")
        hyp.check_ideal_point(array)
        return frozen_array(hyp.normalize_ideal(array), 2)

    @field_validator("weights", mode="before")
    @classmethod
    def _positive_weights(cls, value):
        array = frozen_array(value, 1)
        if np.any(~np.isfinite(array)) or np.any(array <= 0.0):
            raise InadmissibleMeasureError("Atom weights must be finite and positive")
        return array

    @model_validator(mode="after")
    def _consistent(self):
        if self.points.shape[0] != self.weights.shape[0]:
            raise ValueError("Atom and weight counts differ")
        if self.normalized and abs(float(np.sum(self.weights)) - 1.0) > NORMALIZATION_TOL:
            raise ValueError("Normalized measure weights must sum to 1")
        return self

    @classmethod
    def from_weights(cls, points: np.ndarray, weights: np.ndarray) -> "BoundaryMeasure":
        """Normalize raw weights, remembering the raw total mass."""
        weights = np.asarray(weights, dtype=float)
        total = float(np.sum(weights))
        if not np.isfinite(total) or total <= 0.0:
            raise DegenerateMeasureError(f"Measure has non-positive total mass {total}")
        return cls(points=points, weights=weights / total, normalized=True, mass=total)

    @property
    def dim(self) -> int:
        return self.points.shape[1] - 1

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def max_weight(self) -> float:
        return float(np.max(self.weights)) / self.total_mass

    @property
    def is_admissible(self) -> bool:
        return self.max_weight < 0.5

    def check_admissible(self) -> "BoundaryMeasure":
        if not self.is_admissible:
            raise InadmissibleMeasureError(
                f"Largest atom carries weight {self.max_weight:.6f} >= 1/2; no barycenter exists"
            )
        return self

    def to_json(self) -> dict:
        atoms: List[List[float]] = [
            [float(c) for c in point] + [float(w)] for point, w in zip(self.points, self.weights)
        ]
        return {"atoms": atoms}

    @classmethod
    def from_json(cls, payload: dict) -> "BoundaryMeasure":
        atoms = np.asarray(payload["atoms"], dtype=float)
        if atoms.ndim != 2 or atoms.shape[1] < 3:
            raise ValueError("Measure atoms must be rows [coords..., weight]")
        return cls.from_weights(hyp.normalize_ideal(atoms[:, :-1]), atoms[:, -1])
