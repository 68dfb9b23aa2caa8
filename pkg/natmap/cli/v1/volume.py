"""`natmap volume` and `natmap natural-volume`: volumes of equivariant maps and natural volumes."""

from typing import Annotated, List, Optional

import numpy as np
import typer

from natmap.cli.dependencies import (
    CocycleName,
    DomainName,
    Format,
    Out,
    Parallelism,
    PhiNodes,
    QuadOrder,
    RhoNodes,
    Seed,
    Tol,
    get_config,
    get_quadrature,
    get_rng,
    load_cocycle,
    require_domain,
    write_result,
)
from natmap.schemas.volume import CellRecord
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.natural_map.evaluator import build_evaluator
from natmap.services.reporting import emit, flatten_rows, render_csv
from natmap.services.volume.integrator import natural_volume, volume
from natmap.services.volume.maps import ChainMapSpec, map_equivariance
from natmap.services.volume.rigidity import rigidity_audit

EQUIVARIANCE_SAMPLES = 20
DUMP_COLUMNS = ["cell", "x", "weight", "jacobian", "min_singular", "max_singular", "residual"]
DumpCells = Annotated[
    Optional[str], typer.Option("--dump-cells", help="CSV file for per-cell Jacobian data.")
]


def dump_cells_csv(records: List[CellRecord], path: str) -> None:
    """Per-cell Jacobian rows, one per (cell, x), in the v1 CSV layout."""
    rows = flatten_rows([r.model_dump() for r in records], DUMP_COLUMNS)
    emit(render_csv(DUMP_COLUMNS, rows), path)


def volume_command(
    cocycle: CocycleName,
    domain: DomainName = None,
    twisted_chain: Annotated[
        bool, typer.Option("--twisted-chain", help="Compose j with the inverse twist of the cocycle.")
    ] = False,
    dump_cells: DumpCells = None,
    seed: Seed = 0,
    parallelism: Parallelism = None,
    phi_nodes: PhiNodes = 16,
    rho_nodes: RhoNodes = 16,
    out: Out = None,
    format: Format = "json",
):
    """Volume of the totally geodesic chain map x -> f(x)^-1 j_{n,m}."""
    config = get_config(
        "volume",
        {"cocycle": cocycle, "domain": domain or "default", "map": "twisted-chain" if twisted_chain else "chain"},
        parallelism=parallelism,
        seed=seed,
        phi_nodes=phi_nodes,
        rho_nodes=rho_nodes,
        out=out,
        dump_cells=dump_cells,
        format=format,
    )
    instance, cells = load_cocycle(config, cocycle, domain)
    cells = require_domain(cells, cocycle)
    outer = None
    if twisted_chain and instance.twist is not None:
        outer = np.stack([hyp.inverse_isometry(f) for f in instance.twist])
    chain = ChainMapSpec(instance.cocycle, outer=outer)
    deviation = map_equivariance(chain, EQUIVARIANCE_SAMPLES, get_rng(config)).max_deviation
    report = volume(
        chain,
        cells,
        parallelism=config.parallelism,
        keep_records=config.dump_cells is not None,
        equivariance_deviation=deviation,
    )
    if config.dump_cells is not None:
        dump_cells_csv(report.records, config.dump_cells)
    write_result(config, report.model_dump())


def natural_volume_command(
    cocycle: CocycleName,
    domain: DomainName = None,
    rigidity: Annotated[
        bool, typer.Option("--rigidity", help="Recover the conjugating isometries of a maximal cocycle.")
    ] = False,
    dump_cells: DumpCells = None,
    quad_order: QuadOrder = 2048,
    tol: Tol = 1e-10,
    seed: Seed = 0,
    parallelism: Parallelism = None,
    phi_nodes: PhiNodes = 16,
    rho_nodes: RhoNodes = 16,
    out: Out = None,
    format: Format = "json",
):
    """nv(sigma) with its Milnor-Wood margin and verdict."""
    config = get_config(
        "natural-volume",
        {"cocycle": cocycle, "domain": domain or "default"},
        parallelism=parallelism,
        quad_order=quad_order,
        tol=tol,
        seed=seed,
        phi_nodes=phi_nodes,
        rho_nodes=rho_nodes,
        out=out,
        dump_cells=dump_cells,
        format=format,
    )
    instance, cells = load_cocycle(config, cocycle, domain)
    cells = require_domain(cells, cocycle)
    sigma = instance.cocycle
    quad = get_quadrature(config, sigma.source_dim)
    rng = get_rng(config)
    report = natural_volume(
        sigma,
        instance.boundary,
        cells,
        quad,
        tol=config.tol,
        parallelism=config.parallelism,
        rng=rng,
        keep_records=config.dump_cells is not None,
    )
    result = report.model_dump()
    if rigidity:
        ev = build_evaluator(sigma, instance.boundary, quad, tol=config.tol)
        result["rigidity"] = rigidity_audit(report, ev, rng, twist=instance.twist).model_dump()
    if config.dump_cells is not None:
        dump_cells_csv(report.records, config.dump_cells)
    write_result(config, result)
