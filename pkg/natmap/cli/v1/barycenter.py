"""`natmap barycenter`: barycenter of a finite boundary measure."""

from typing import Annotated

import typer

from natmap.cli.dependencies import Format, Out, Seed, Tol, get_catalog, get_config, write_result
from natmap.services.barycenter.solver import barycenter, lambda_value

MeasureName = Annotated[str, typer.Option("--measure", help="Measure instance name or JSON path.")]


def barycenter_command(
    measure: MeasureName,
    tol: Tol = 1e-10,
    seed: Seed = 0,
    out: Out = None,
    format: Format = "json",
):
    """Solve for the barycenter of a measure given as {"atoms": [[coords..., w], ...]}."""
    config = get_config("barycenter", {"measure": measure}, tol=tol, seed=seed, out=out, format=format)
    nu = get_catalog().measure(measure).check_admissible()
    result = barycenter(nu, tol=config.tol)
    write_result(
        config,
        {
            "atoms": nu.size,
            "dim": nu.dim,
            "max_weight": nu.max_weight,
            "lambda": lambda_value(nu, result.point),
            **result.summary(),
        },
    )
