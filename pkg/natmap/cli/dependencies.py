"""Shared flag resolution for the commands: run config, seeding, instances and output."""

import logging
import os
from typing import Annotated, Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import typer

from natmap.schemas.cocycle import CocycleInstance
from natmap.schemas.lattice import FundamentalDomain
from natmap.schemas.measure import SphereQuadrature
from natmap.schemas.run_config import RunConfig
from natmap.services.errors import NatmapError
from natmap.services.instances import InstanceCatalog
from natmap.services.measures.quadrature import sphere_quadrature
from natmap.services.reporting import (
    build_report,
    emit,
    render_csv,
    render_json,
)

logger = logging.getLogger(__name__)

NUM_THREADS_ENV = "NATMAP_NUM_THREADS"

QuadOrder = Annotated[int, typer.Option("--quad-order", help="Node count of the boundary quadrature.")]
Tol = Annotated[float, typer.Option("--tol", help="Barycenter residual tolerance.")]
Seed = Annotated[int, typer.Option("--seed", help="Seed of every random draw (unsigned 64-bit).")]
Parallelism = Annotated[
    Optional[int],
    typer.Option("--parallelism", help=f"Worker count; falls back to ${NUM_THREADS_ENV}, then 1."),
]
Out = Annotated[Optional[str], typer.Option("--out", help="Output file; stdout when omitted.")]
Format = Annotated[str, typer.Option("--format", help="Report format: json or csv.")]
PhiNodes = Annotated[int, typer.Option("--phi-nodes", help="Angular nodes per domain triangle.")]
RhoNodes = Annotated[int, typer.Option("--rho-nodes", help="Radial nodes per domain triangle.")]
CocycleName = Annotated[str, typer.Option("--cocycle", help="Cocycle instance name or JSON path.")]
DomainName = Annotated[
    Optional[str], typer.Option("--domain", help="Fundamental domain; defaults to the cocycle's group.")
]


def resolve_parallelism(flag: Optional[int]) -> int:
    """The --parallelism flag, then NATMAP_NUM_THREADS, then 1."""
    if flag is not None:
        return flag
    value = os.getenv(NUM_THREADS_ENV)
    if not value:
        return 1
    try:
        return int(value)
    except ValueError as exc:
        raise NatmapError(f"{NUM_THREADS_ENV} must be an integer, got '{value}'") from exc


def get_config(
    command: str,
    inputs: Optional[Dict[str, str]] = None,
    parallelism: Optional[int] = None,
    **flags: Any,
) -> RunConfig:
    """RunConfig for a command; flags left as None take the config defaults."""
    values = {key: value for key, value in flags.items() if value is not None}
    return RunConfig(
        command=command,
        inputs=inputs or {},
        parallelism=resolve_parallelism(parallelism),
        **values,
    )


def get_rng(config: RunConfig) -> np.random.Generator:
    return np.random.default_rng(config.seed)


def get_catalog() -> InstanceCatalog:
    return InstanceCatalog()


def get_quadrature(config: RunConfig, dim: int) -> SphereQuadrature:
    return sphere_quadrature(dim, config.quad_order)


def load_cocycle(
    config: RunConfig, value: str, domain_name: Optional[str] = None
) -> Tuple[CocycleInstance, Optional[FundamentalDomain]]:
    """Cocycle instance and the domain to integrate over.

    Raises:
        NatmapError: If --domain names a group other than the cocycle's group.
    """
    catalog = get_catalog()
    instance, domain = catalog.cocycle(value, config.phi_nodes, config.rho_nodes)
    if domain_name is not None:
        group, domain = catalog.group(domain_name, config.phi_nodes, config.rho_nodes)
        if group.label != instance.cocycle.group.label:
            raise NatmapError(
                f"Domain '{domain_name}' belongs to {group.label}, the cocycle to {instance.cocycle.group.label}"
            )
    return instance, domain


def require_domain(domain: Optional[FundamentalDomain], value: str) -> FundamentalDomain:
    if domain is None:
        raise NatmapError(f"Cocycle '{value}' is over a group without a built-in fundamental domain")
    return domain


def scalar_rows(result: Dict[str, Any]) -> List[List[Any]]:
    """Key/value rows of the scalar entries of a result, for --format csv."""
    return [
        [key, value]
        for key, value in sorted(result.items())
        if isinstance(value, (int, float, str, bool, np.integer, np.floating))
    ]


def write_result(
    config: RunConfig,
    result: Dict[str, Any],
    header: Optional[Sequence[str]] = None,
    rows: Optional[List[List[Any]]] = None,
) -> None:
    """Single writer for a command's output in the configured format."""
    report = build_report(config, result)
    if config.format == "csv":
        if rows is None:
            header, rows = ["key", "value"], scalar_rows(report.result)
        text = render_csv(header, rows)
    else:
        text = render_json(report)
    emit(text, config.out)
