"""Run configuration shared by every command."""

from __future__ import annotations

from typing import Dict, Literal, Optional

from pydantic import BaseModel, Field


class RunConfig(BaseModel):
    command: str
    inputs: Dict[str, str] = Field(default_factory=dict)
    quad_order: int = Field(default=2048, ge=3)
    tol: float = Field(default=1e-10, gt=0.0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    parallelism: int = Field(default=1, ge=1)
    phi_nodes: int = Field(default=16, ge=2)
    rho_nodes: int = Field(default=16, ge=2)
    out: Optional[str] = None
    dump_cells: Optional[str] = None
    format: Literal["json", "csv"] = "json"
