"""`natmap ps-check`: orbit-sum Patterson measure against the visual measure, and orbit growth."""

from typing import Annotated

import typer

from natmap.cli.dependencies import (
    Format,
    Out,
    QuadOrder,
    Seed,
    get_catalog,
    get_config,
    get_quadrature,
    write_result,
)
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.lattice.groups import growth_rate, orbit_ball
from natmap.services.measures.boundary_measure import (
    binned_total_variation,
    critical_exponent,
    visual_measure,
)
from natmap.services.measures.patterson_sullivan import (
    DEFAULT_EXPONENT_SCALE,
    poincare_series,
    ps_orbit_measure,
)

TV_THRESHOLD = 0.1
GROWTH_TOLERANCE = 0.1


def ps_check_command(
    group: Annotated[str, typer.Option("--group", help="Built-in lattice.")] = "genus2",
    radius: Annotated[float, typer.Option("--radius", help="Orbit ball radius R.")] = 14.0,
    scale: Annotated[float, typer.Option("--scale", help="Exponent s as a multiple of delta.")] = DEFAULT_EXPONENT_SCALE,
    bins: Annotated[int, typer.Option("--bins", help="Arcs used for the binned comparison on S^1.")] = 8,
    quad_order: QuadOrder = 2048,
    seed: Seed = 0,
    out: Out = None,
    format: Format = "json",
):
    """Compare the Patterson measure at s = scale * delta with the visual measure at o."""
    config = get_config("ps-check", {"group": group}, quad_order=quad_order, seed=seed, out=out, format=format)
    lattice, _ = get_catalog().group(group)
    delta = critical_exponent(lattice.dim)
    s = scale * delta
    orbit = orbit_ball(lattice, radius)
    patterson = ps_orbit_measure(lattice, s=s, radius=radius, orbit=orbit)
    visual = visual_measure(hyp.origin(lattice.dim), get_quadrature(config, lattice.dim))
    tv = binned_total_variation(patterson, visual, bins)
    growth = growth_rate(orbit, radius)
    write_result(
        config,
        {
            "group": lattice.label,
            "radius": radius,
            "exponent": s,
            "critical_exponent": delta,
            "orbit_points": orbit.size,
            "poincare_series": poincare_series(lattice, s, radius=radius, orbit=orbit),
            "binned_total_variation": tv,
            "tv_passed": tv < TV_THRESHOLD,
            "growth_rate": growth,
            "growth_passed": abs(growth - delta) < GROWTH_TOLERANCE * delta,
        },
    )
