"""Schemas for covering maps and mapping-degree experiments."""

from __future__ import annotations

from typing import List, Literal

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from natmap.schemas.lattice import FundamentalDomain, GroupPresentation, Word
from natmap.schemas.volume import Verdict
from natmap.services.errors import DimensionError


class CoveringMap(BaseModel):
    """f: M -> N with pi_1(f) given on the generators of Gamma as words in Lambda."""

    source: GroupPresentation
    source_domain: FundamentalDomain
    target: GroupPresentation
    target_domain: FundamentalDomain
    inclusion: List[Word]
    degree: int
    label: str = "covering"

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("inclusion", mode="before")
    @classmethod
    def _words(cls, value):
        return [tuple(int(letter) for letter in word) for word in value]

    @model_validator(mode="after")
    def _shapes(self):
        if len(self.inclusion) != self.source.rank:
            raise DimensionError(
                f"Inclusion gives {len(self.inclusion)} words for {self.source.rank} generators"
            )
        if self.source.dim != self.target.dim:
            raise DimensionError("Covering maps need manifolds of equal dimension")
        if self.degree < 1:
            raise ValueError(f"Degree must be positive, got {self.degree}")
        return self


class DegreeReport(BaseModel):
    degree: int
    counting: int
    source_volume: float
    target_volume: float
    map_volume_source: float
    map_volume_target: float
    map_ratio: float
    natural_volume_source: float
    natural_volume_target: float
    natural_ratio: float
    natural_map_mode: Literal["direct", "folded"]
    equivariance_deviation: float
    source_verdict: Verdict
    target_verdict: Verdict

    @property
    def bound_holds(self) -> bool:
        return self.natural_ratio >= self.degree - 3e-3 and self.map_ratio >= self.degree - 3e-3
