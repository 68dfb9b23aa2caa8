"""Schemas for finitely presented groups of isometries and their fundamental domains."""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from natmap.schemas.geometry import frozen_array
from natmap.services.geometry import hyperboloid as hyp

Word = Tuple[int, ...]


class GroupPresentation(BaseModel):
    """Generators as isometry matrices; words are tuples of signed 1-based generator indices."""

    dim: int
    generators: np.ndarray
    relators: List[Word] = []
    label: str = "group"
    covering_radius: Optional[float] = None
    parent_words: Optional[List[Word]] = None
    transversal: Optional[List[Word]] = None

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("generators", mode="before")
    @classmethod
    def _isometries(cls, value, info):
        dim = info.data.get("dim")
        array = np.array(value, dtype=float)
        if array.size == 0:
            array = np.zeros((0, dim + 1, dim + 1))
        if array.ndim != 3 or array.shape[1:] != (dim + 1, dim + 1):
            raise ValueError(f"Generators must be a stack of {dim + 1}x{dim + 1} matrices")
        for matrix in array:
            hyp.check_isometry(matrix, tol=1e-9)
        return frozen_array(array, 3)

    @field_validator("relators", "parent_words", "transversal", mode="before")
    @classmethod
    def _words(cls, value):
        if value is None:
            return None
        return [tuple(int(letter) for letter in word) for word in value]

    @property
    def rank(self) -> int:
        return self.generators.shape[0]

    @property
    def base(self) -> np.ndarray:
        return hyp.origin(self.dim)


class FundamentalDomain(BaseModel):
    """Quadrature cells (point, weight) tiling a fundamental domain.

    Cells are generated from the octagon builder at resolution (phi_nodes, rho_nodes)
    and replicated by the translate isometries, so the domain can be rebuilt at
    another resolution.
    """

    dim: int
    points: np.ndarray
    weights: np.ndarray
    phi_nodes: int
    rho_nodes: int
    translates: np.ndarray
    label: str = "domain"

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("points", "translates", mode="before")
    @classmethod
    def _stack(cls, value):
        array = np.array(value, dtype=float)
        return frozen_array(array, array.ndim)

    @field_validator("weights", mode="before")
    @classmethod
    def _positive(cls, value):
        array = frozen_array(value, 1)
        if np.any(array <= 0.0):
            raise ValueError("Cell weights must be positive")
        return array

    @property
    def total_volume(self) -> float:
        return float(np.sum(self.weights))

    @property
    def size(self) -> int:
        return self.points.shape[0]


class OrbitBall(BaseModel):
    """Orbit points of a base point, in shortlex order of their words."""

    words: List[Word]
    points: np.ndarray
    distances: np.ndarray
    radius: float

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def size(self) -> int:
        return len(self.words)
