"""`natmap degree`: volume ratios along a covering map."""

from typing import Annotated

import typer

from natmap.cli.dependencies import (
    Format,
    Out,
    Parallelism,
    PhiNodes,
    QuadOrder,
    RhoNodes,
    Seed,
    Tol,
    get_catalog,
    get_config,
    get_quadrature,
    get_rng,
    write_result,
)
from natmap.services.degree.experiment import degree_experiment

CoveringName = Annotated[str, typer.Option("--covering", help="Covering instance name or JSON path.")]


def degree_command(
    covering: CoveringName,
    quad_order: QuadOrder = 2048,
    tol: Tol = 1e-10,
    seed: Seed = 0,
    parallelism: Parallelism = None,
    phi_nodes: PhiNodes = 16,
    rho_nodes: RhoNodes = 16,
    out: Out = None,
    format: Format = "json",
):
    """deg(f) against vol(f*Phi)/vol(Phi) and nv(f*sigma)/nv(sigma)."""
    config = get_config(
        "degree",
        {"covering": covering},
        parallelism=parallelism,
        quad_order=quad_order,
        tol=tol,
        seed=seed,
        phi_nodes=phi_nodes,
        rho_nodes=rho_nodes,
        out=out,
        format=format,
    )
    f, instance = get_catalog().covering(covering, config.phi_nodes, config.rho_nodes)
    report = degree_experiment(
        f,
        instance.cocycle,
        instance.boundary,
        get_quadrature(config, f.target.dim),
        tol=config.tol,
        parallelism=config.parallelism,
        rng=get_rng(config),
    )
    write_result(
        config,
        {
            "covering": f.label,
            "cocycle": instance.label,
            "bound_holds": report.bound_holds,
            **report.model_dump(),
        },
    )
