"""Schemas for finite probability Gamma-spaces, cocycles and boundary-map chains."""

from __future__ import annotations

from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from natmap.schemas.geometry import frozen_array
from natmap.schemas.lattice import GroupPresentation
from natmap.services.errors import DimensionError
from natmap.services.geometry import hyperboloid as hyp

MEASURE_TOL = 1e-15


class FiniteProbSpace(BaseModel):
    """Points 0..N-1 with weights; generator g sends x to actions[g][x]."""

    weights: np.ndarray
    actions: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("weights", mode="before")
    @classmethod
    def _probability(cls, value):
        array = frozen_array(value, 1)
        if np.any(array <= 0.0) or abs(float(np.sum(array)) - 1.0) > 1e-12:
            raise ValueError("Space weights must be positive and sum to 1")
        return array

    @field_validator("actions", mode="before")
    @classmethod
    def _permutations(cls, value):
        array = np.array(value, dtype=int)
        if array.ndim == 1 and array.size == 0:
            array = array.reshape(0, 0)
        if array.ndim != 2:
            raise ValueError("Actions must be one permutation per generator")
        for perm in array:
            if sorted(perm.tolist()) != list(range(perm.shape[0])):
                raise ValueError(f"Action {perm.tolist()} is not a permutation")
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def _measure_preserving(self):
        if self.actions.shape[0] and self.actions.shape[1] != self.size:
            raise ValueError("Action arrays must have one entry per point")
        for perm in self.actions:
            if np.max(np.abs(self.weights[perm] - self.weights)) > MEASURE_TOL:
                raise ValueError("Action does not preserve the point weights")
        return self

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    def act(self, letter: int, x: int) -> int:
        perm = self.actions[abs(letter) - 1]
        if letter > 0:
            return int(perm[x])
        return int(np.argmax(perm == x))


class Cocycle(BaseModel):
    """Generator values sigma(g, x) in O(m, 1), extended to words by the cocycle rule."""

    group: GroupPresentation
    space: FiniteProbSpace
    target_dim: int
    values: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("values", mode="before")
    @classmethod
    def _stack(cls, value):
        return frozen_array(value, 4)

    @model_validator(mode="after")
    def _shapes(self):
        m = self.target_dim
        expected = (self.group.rank, self.space.size, m + 1, m + 1)
        if self.values.shape != expected:
            raise DimensionError(f"Cocycle values have shape {self.values.shape}, expected {expected}")
        if self.group.rank and self.space.actions.shape[0] != self.group.rank:
            raise DimensionError("Space needs one action per group generator")
        if m < self.group.dim:
            raise DimensionError(f"Target H^{m} is smaller than source H^{self.group.dim}")
        return self

    @property
    def source_dim(self) -> int:
        return self.group.dim


class IsometryStep(BaseModel):
    kind: Literal["isometry"] = "isometry"
    matrix: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("matrix", mode="before")
    @classmethod
    def _lorentzian(cls, value):
        array = frozen_array(value, 2)
        hyp.check_isometry(array, tol=1e-9)
        return array


class EmbedStep(BaseModel):
    kind: Literal["embed"] = "embed"
    target_dim: int


class SquashStep(BaseModel):
    """Radial reparametrization alpha -> 2 atan(tan(alpha/2)^kappa) about a center."""

    kind: Literal["squash"] = "squash"
    center: List[float]
    kappa: float = Field(gt=0.0)


class BendStep(BaseModel):
    """Scales the stereographic chart about e_m by exp(amplitude Re((x1 + i x2)^frequency))."""

    kind: Literal["bend"] = "bend"
    amplitude: float
    frequency: int = Field(ge=0)


BoundaryStep = Annotated[
    Union[IsometryStep, EmbedStep, SquashStep, BendStep], Field(discriminator="kind")
]


class BoundaryMapSpec(BaseModel):
    """One composition chain per point of X; steps apply in list order."""

    source_dim: int
    slices: List[List[BoundaryStep]]

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class EquivarianceReport(BaseModel):
    """Worst deviation of phi_{gx}(g xi) from sigma(g, x) phi_x(xi) over sampled triples."""

    samples: int
    max_deviation: float
    worst_word: List[int] = Field(default_factory=list)
    worst_point: int = 0


class CocycleInstance(BaseModel):
    """A cocycle with its boundary map, as loaded from a named instance."""

    label: str
    cocycle: Cocycle
    boundary: BoundaryMapSpec
    twist: Optional[np.ndarray] = None

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
