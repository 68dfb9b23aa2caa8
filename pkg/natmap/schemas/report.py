"""Versioned report envelope written by every command."""

from __future__ import annotations

from typing import Any, Dict, List, Literal

from pydantic import BaseModel

from natmap.schemas.run_config import RunConfig

SCHEMA_VERSION = "v1"


class Report(BaseModel):
    v: Literal["v1"] = SCHEMA_VERSION
    command: str
    config: RunConfig
    seed: int
    versions: Dict[str, str]
    result: Dict[str, Any]


class SelftestCheck(BaseModel):
    name: str
    passed: bool
    value: float
    threshold: float


class SelftestReport(BaseModel):
    checks: List[SelftestCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)
