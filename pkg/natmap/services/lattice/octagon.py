"""The regular genus-2 octagon: side pairings, presentation and area quadrature."""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.special import roots_legendre

from natmap.schemas.lattice import FundamentalDomain, GroupPresentation
from natmap.services.errors import InvalidPointError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.lattice.groups import alphabet, check_relators, letter_matrix

logger = logging.getLogger(__name__)

SIDES = 8
# cosh r_in = cot(pi/8), cosh R_c = cot(pi/8)^2 for the octagon with angles pi/4
INRADIUS = float(np.arccosh(1.0 / np.tan(np.pi / SIDES)))
CIRCUMRADIUS = float(np.arccosh(1.0 / np.tan(np.pi / SIDES) ** 2))
SIDE_PAIRING = (2, 3, 0, 1, 6, 7, 4, 5)
# a1 = g3, b1 = g0, a2 = g7, b2 = g4
GENERATOR_SIDES = (3, 0, 7, 4)
SURFACE_RELATOR = (1, 2, -1, -2, 3, 4, -3, -4)

DEFAULT_PHI_NODES = 16
DEFAULT_RHO_NODES = 16
CONTAINMENT_TOL = 1e-9


def side_angle(index: int) -> float:
    return index * np.pi / 4.0


def side_pairing(index: int) -> np.ndarray:
    """Isometry mapping side sigma(i) onto side i and the octagon onto its neighbour across side i."""
    return (
        hyp.plane_rotation(2, side_angle(index))
        @ hyp.axis_boost(2, 2.0 * INRADIUS)
        @ hyp.plane_rotation(2, np.pi)
        @ hyp.plane_rotation(2, -side_angle(SIDE_PAIRING[index]))
    )


def octagon_vertices() -> np.ndarray:
    angles = np.arange(SIDES) * np.pi / 4.0 + np.pi / 8.0
    return np.stack(
        [
            np.full(SIDES, np.cosh(CIRCUMRADIUS)),
            np.sinh(CIRCUMRADIUS) * np.cos(angles),
            np.sinh(CIRCUMRADIUS) * np.sin(angles),
        ],
        axis=1,
    )


def interior_angles() -> np.ndarray:
    """Interior angle of the octagon at each vertex."""
    vertices = octagon_vertices()
    angles = np.empty(SIDES)
    for k in range(SIDES):
        to_prev = hyp.log_map(vertices[k], vertices[k - 1])
        to_next = hyp.log_map(vertices[k], vertices[(k + 1) % SIDES])
        cosine = hyp.mdot(to_prev, to_next) / (hyp.tangent_norm(to_prev) * hyp.tangent_norm(to_next))
        angles[k] = np.arccos(np.clip(cosine, -1.0, 1.0))
    return angles


def octagon_cells(phi_nodes: int, rho_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Quadrature cells of the octagon from its 16 right triangles (o, side midpoint, vertex).

    Each triangle is parametrized in geodesic polar coordinates about o with
    tanh(rho_max) = tanh(r_in) / cos(psi), psi the angle from the side normal;
    Gauss-Legendre in psi and in rho with the area density sinh(rho).
    """
    x_psi, w_psi = roots_legendre(phi_nodes)
    x_rho, w_rho = roots_legendre(rho_nodes)
    half = np.pi / SIDES
    psi = half * (x_psi + 1.0) / 2.0
    psi_weights = half * w_psi / 2.0
    rho_max = np.arctanh(np.tanh(INRADIUS) / np.cos(psi))
    rho = rho_max[:, None] * (x_rho[None, :] + 1.0) / 2.0
    weights = psi_weights[:, None] * (rho_max[:, None] * w_rho[None, :] / 2.0) * np.sinh(rho)

    points, cell_weights = [], []
    for side in range(SIDES):
        for sign in (1.0, -1.0):
            phi = side_angle(side) + sign * psi
            points.append(
                np.stack(
                    [
                        np.cosh(rho),
                        np.sinh(rho) * np.cos(phi)[:, None],
                        np.sinh(rho) * np.sin(phi)[:, None],
                    ],
                    axis=-1,
                ).reshape(-1, 3)
            )
            cell_weights.append(weights.ravel())
    return np.concatenate(points), np.concatenate(cell_weights)


def octagon_domain(
    phi_nodes: int = DEFAULT_PHI_NODES,
    rho_nodes: int = DEFAULT_RHO_NODES,
    translates: Optional[np.ndarray] = None,
    label: str = "genus2",
) -> FundamentalDomain:
    """Octagon cells replicated by each translate isometry (identity by default)."""
    translates = np.eye(3)[None] if translates is None else np.asarray(translates, dtype=float)
    cells, weights = octagon_cells(phi_nodes, rho_nodes)
    points = np.concatenate([cells @ t.T for t in translates])
    return FundamentalDomain(
        dim=2,
        points=points,
        weights=np.tile(weights, translates.shape[0]),
        phi_nodes=phi_nodes,
        rho_nodes=rho_nodes,
        translates=translates,
        label=label,
    )


def with_resolution(domain: FundamentalDomain, phi_nodes: int, rho_nodes: int) -> FundamentalDomain:
    return octagon_domain(phi_nodes, rho_nodes, domain.translates, domain.label)


def coarsened(domain: FundamentalDomain) -> FundamentalDomain:
    """Same domain with half the nodes per direction, for refinement error estimates."""
    return with_resolution(domain, max(2, domain.phi_nodes // 2), max(2, domain.rho_nodes // 2))


def refined(domain: FundamentalDomain) -> FundamentalDomain:
    return with_resolution(domain, 2 * domain.phi_nodes, 2 * domain.rho_nodes)


def genus2_group() -> GroupPresentation:
    generators = np.stack([side_pairing(side) for side in GENERATOR_SIDES])
    group = GroupPresentation(
        dim=2,
        generators=generators,
        relators=[SURFACE_RELATOR],
        label="genus2",
        covering_radius=CIRCUMRADIUS,
    )
    return check_relators(group)


def genus2_octagon(
    phi_nodes: int = DEFAULT_PHI_NODES, rho_nodes: int = DEFAULT_RHO_NODES
) -> Tuple[GroupPresentation, FundamentalDomain]:
    """The genus-2 surface group and its octagon fundamental domain centered at o."""
    group = genus2_group()
    domain = octagon_domain(phi_nodes, rho_nodes)
    logger.info(
        f"Genus-2 octagon: {domain.size} cells, area {domain.total_volume:.10f} (exact {4 * np.pi:.10f})"
    )
    return group, domain


def check_dirichlet(domain: FundamentalDomain, group: GroupPresentation) -> float:
    """Worst violation of d(p, o) <= d(p, g o) over cells and generators.

    Each translate block of the domain is first pulled back by its translate.

    Raises:
        InvalidPointError: If some cell point lies outside the Dirichlet domain.
    """
    base = group.base
    neighbours = np.stack([letter_matrix(group, l) @ base for l in alphabet(group.rank)])
    block = domain.size // domain.translates.shape[0]
    worst = -np.inf
    for index, translate in enumerate(domain.translates):
        pulled = domain.points[index * block : (index + 1) * block] @ hyp.inverse_isometry(translate).T
        own = hyp.distance(pulled, base)
        others = np.min(hyp.distance(pulled[:, None, :], neighbours[None, :, :]), axis=1)
        worst = max(worst, float(np.max(own - others)))
    if worst > CONTAINMENT_TOL:
        raise InvalidPointError(f"Cell points leave the Dirichlet domain by {worst:.3e}")
    return worst
