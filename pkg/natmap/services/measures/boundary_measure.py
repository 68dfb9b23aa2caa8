"""Visual (Patterson-Sullivan) densities, push-forwards and binned comparisons."""

from __future__ import annotations

import logging
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from natmap.schemas.measure import BoundaryMeasure, SphereQuadrature
from natmap.services.errors import DimensionError, InadmissibleMeasureError
from natmap.services.geometry import hyperboloid as hyp

logger = logging.getLogger(__name__)

MERGE_TOL = 1e-12

BoundaryFunction = Callable[[np.ndarray], np.ndarray]


def critical_exponent(n: int, d: int = 1) -> float:
    """delta = d(n+1) - 2, the critical exponent of a lattice in the isometry group of H^n_K."""
    if n < 2:
        raise DimensionError(f"Critical exponent is defined for n >= 2, got {n}")
    return float(d * (n + 1) - 2)


def visual_weights(a: np.ndarray, quad: SphereQuadrature) -> np.ndarray:
    """Unnormalized weights q_i exp(-delta beta_o(a, xi_i)) at the quadrature nodes."""
    delta = critical_exponent(quad.dim)
    a = np.asarray(a, dtype=float)
    hyp.point_dimension(a, quad.dim)
    # beta_o(a, xi) = log(-<a, xi>) for normalized ideal points
    return quad.weights * (-hyp.mdot(quad.nodes, a)) ** (-delta)


def visual_measure(a: np.ndarray, quad: SphereQuadrature) -> BoundaryMeasure:
    """The visual density nu_a at the quadrature nodes, normalized to a probability.

    The raw total mass is kept on the returned measure; it integrates the Poisson
    kernel and equals 1 up to quadrature error.
    """
    return BoundaryMeasure.from_weights(quad.nodes, visual_weights(a, quad))


def merge_atoms(points: np.ndarray, weights: np.ndarray, tol: float = MERGE_TOL):
    """Merge atoms whose spatial parts lie within tol of each other."""
    spatial = points[:, 1:]
    pairs = cKDTree(spatial).query_pairs(r=tol, output_type="ndarray")
    if pairs.shape[0] == 0:
        return points, weights
    parent = np.arange(points.shape[0])

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = np.array([find(i) for i in range(points.shape[0])])
    keep, inverse = np.unique(roots, return_inverse=True)
    merged = np.zeros(keep.shape[0])
    np.add.at(merged, inverse, weights)
    logger.debug(f"Merged {points.shape[0] - keep.shape[0]} coincident atoms")
    return points[keep], merged


def pushforward(
    mu: BoundaryMeasure, phi: BoundaryFunction, check: bool = True
) -> BoundaryMeasure:
    """Push a measure forward by a boundary map acting on stacks of ideal points.

    Raises:
        InadmissibleMeasureError: If merging coincident images creates an atom of weight >= 1/2.
    """
    images = hyp.normalize_ideal(phi(mu.points))
    points, weights = merge_atoms(images, np.asarray(mu.weights))
    pushed = BoundaryMeasure(
        points=points, weights=weights, normalized=mu.normalized, mass=mu.mass
    )
    if check and not pushed.is_admissible:
        raise InadmissibleMeasureError(
            f"Push-forward has an atom of weight {pushed.max_weight:.6f} >= 1/2; "
            "the boundary map is not injective on the support"
        )
    return pushed


def _bin_labels(points: np.ndarray, num_bins: int) -> np.ndarray:
    directions = points[:, 1:]
    if directions.shape[1] == 2:
        angles = np.mod(np.arctan2(directions[:, 1], directions[:, 0]) + np.pi / (2 * num_bins), 2 * np.pi)
        return np.minimum((angles / (2 * np.pi) * num_bins).astype(int), num_bins - 1)
    # Cells of the cross-polytope: nearest signed coordinate axis.
    index = np.argmax(np.abs(directions), axis=1)
    sign = directions[np.arange(directions.shape[0]), index] < 0
    return 2 * index + sign


def binned_total_variation(
    mu: BoundaryMeasure, nu: BoundaryMeasure, num_bins: Optional[int] = 8
) -> float:
    """Total variation between two measures after binning the boundary sphere.

    On S^1 the bins are num_bins equal arcs, edges a quarter bin off the multiples of 2pi/num_bins;
    on higher spheres they are the 2n cells of the nearest signed axis.
    """
    if mu.dim != nu.dim:
        raise DimensionError("Measures live on different spheres")
    count = num_bins if mu.dim == 2 else 2 * mu.dim
    hist_mu = np.bincount(_bin_labels(mu.points, count), weights=mu.weights, minlength=count)
    hist_nu = np.bincount(_bin_labels(nu.points, count), weights=nu.weights, minlength=count)
    hist_mu /= np.sum(hist_mu)
    hist_nu /= np.sum(hist_nu)
    return 0.5 * float(np.sum(np.abs(hist_mu - hist_nu)))
