"""Schemas for volume reports, per-cell records and rigidity verdicts."""

from __future__ import annotations

from typing import List, Literal, Optional

from pydantic import BaseModel, Field

Verdict = Literal["maximal", "strict", "inconclusive"]


class CellRecord(BaseModel):
    """One (cell, x) evaluation, used for CSV dumps."""

    cell: int
    x: int
    ball: List[float]
    weight: float
    jacobian: float
    min_singular: float
    max_singular: float
    residual: float


class VolumeReport(BaseModel):
    volume: float
    per_x: List[float]
    domain_volume: float
    jacobian_min: float
    jacobian_mean: float
    jacobian_max: float
    milnor_wood_margin: float
    error_estimate: float
    coarse_volume: Optional[float] = None
    verdict: Verdict
    partial: bool = False
    failed_cells: int = 0
    map_kind: str = "natural"
    equivariance_deviation: Optional[float] = None
    cells: int = 0
    space_size: int = 1
    records: List[CellRecord] = Field(default_factory=list, exclude=True)

    @property
    def relative_margin(self) -> float:
        return self.milnor_wood_margin / self.domain_volume


class RigidityReport(BaseModel):
    """Per-point isometries f(x) with F_x = f(x)^-1 j_{n,m}, when the volume is maximal."""

    verdict: Verdict
    attempted: bool
    max_residual: Optional[float] = None
    inconsistent: bool = False
    isometries: List[List[List[float]]] = Field(default_factory=list)
    twist_deviation: Optional[float] = None
