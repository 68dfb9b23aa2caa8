"""`natmap natmap eval` and `natmap jacobian-scan`: the natural map at a point and over a domain."""

from typing import Annotated, List

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
    load_cocycle,
    require_domain,
    write_result,
)
from natmap.services.errors import InvalidPointError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.natural_map.audit import bcg_bound_audit
from natmap.services.natural_map.evaluator import (
    build_evaluator,
    differential,
    implicit_residual,
    is_isometric,
    jacobian,
)
from natmap.services.volume.integrator import cell_records, evaluate_cells
from natmap.services.volume.maps import NaturalMapSpec

app = typer.Typer(help="Evaluate natural maps.", no_args_is_help=True)

SCAN_COLUMNS = ["cell", "x", "ball", "weight", "jacobian", "min_singular", "max_singular", "residual"]


def parse_point(text: str) -> np.ndarray:
    """Hyperboloid coordinates "a0,a1,..." into a checked point."""
    try:
        a = np.array([float(c) for c in text.split(",")])
    except ValueError as exc:
        raise InvalidPointError(f"Point must be comma-separated numbers, got '{text}'") from exc
    return hyp.check_point(a)


@app.command("eval")
def eval_command(
    cocycle: CocycleName,
    point: Annotated[str, typer.Option("--point", help="Hyperboloid coordinates a0,a1,...")],
    x: Annotated[int, typer.Option("--x", help="Point of the probability space.")] = 0,
    quad_order: QuadOrder = 2048,
    tol: Tol = 1e-10,
    seed: Seed = 0,
    out: Out = None,
    format: Format = "json",
):
    """F(a, x), its differential and the Jacobian bound audit."""
    config = get_config(
        "natmap eval",
        {"cocycle": cocycle, "point": point},
        quad_order=quad_order,
        tol=tol,
        seed=seed,
        out=out,
        format=format,
    )
    instance, _ = load_cocycle(config, cocycle)
    sigma = instance.cocycle
    ev = build_evaluator(sigma, instance.boundary, get_quadrature(config, sigma.source_dim), tol=config.tol)
    a = parse_point(point)
    diff = differential(ev, a, x)
    audit = bcg_bound_audit(diff)
    write_result(
        config,
        {
            "x": x,
            "base": a,
            "image": diff.point,
            "ball": hyp.to_ball(diff.point),
            "jacobian": jacobian(diff),
            "singular_values": diff.singular_values,
            "differential": diff.matrix,
            "isometric": is_isometric(diff),
            "barycenter_residual": diff.residual,
            "implicit_residual": implicit_residual(ev, a, x, diff.point),
            "audit": audit.model_dump(),
            "audit_holds": audit.holds,
        },
    )


@app.command("jacobian-scan")
def jacobian_scan_command(
    cocycle: CocycleName,
    domain: DomainName = None,
    quad_order: QuadOrder = 2048,
    tol: Tol = 1e-10,
    seed: Seed = 0,
    parallelism: Parallelism = None,
    phi_nodes: PhiNodes = 16,
    rho_nodes: RhoNodes = 16,
    out: Out = None,
    format: Format = "csv",
):
    """Jacobian data of every slice over the fundamental domain, one row per (cell, x)."""
    config = get_config(
        "jacobian-scan",
        {"cocycle": cocycle, "domain": domain or "default"},
        parallelism=parallelism,
        quad_order=quad_order,
        tol=tol,
        seed=seed,
        phi_nodes=phi_nodes,
        rho_nodes=rho_nodes,
        out=out,
        format=format,
    )
    instance, cells = load_cocycle(config, cocycle, domain)
    cells = require_domain(cells, cocycle)
    sigma = instance.cocycle
    ev = build_evaluator(sigma, instance.boundary, get_quadrature(config, sigma.source_dim), tol=config.tol)
    values = evaluate_cells(NaturalMapSpec(ev), cells, config.parallelism)
    records = cell_records(cells, values)
    jac = np.array([r.jacobian for r in records])
    rows: List[list] = [
        [r.cell, r.x, *r.ball, r.weight, r.jacobian, r.min_singular, r.max_singular, r.residual]
        for r in records
    ]
    ball_columns = [f"ball_{i}" for i in range(1, sigma.source_dim + 1)]
    header = SCAN_COLUMNS[:2] + ball_columns + SCAN_COLUMNS[3:]
    write_result(
        config,
        {
            "domain": cells.label,
            "cells": cells.size,
            "evaluated": len(records),
            "failed": cells.size * sigma.space.size - len(records),
            "jacobian_min": float(np.min(jac)) if jac.size else 0.0,
            "jacobian_max": float(np.max(jac)) if jac.size else 0.0,
            "records": [r.model_dump() for r in records],
        },
        header=header,
        rows=rows,
    )
