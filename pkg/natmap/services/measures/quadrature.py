"""Product quadrature rules on the boundary sphere S^{n-1} of H^n."""

from __future__ import annotations

import itertools
import logging
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.special import gammaln, roots_jacobi

from natmap.schemas.measure import SphereQuadrature
from natmap.services.errors import DimensionError

logger = logging.getLogger(__name__)

VALIDATION_TOL = 1e-10
MAX_VALIDATED_DEGREE = 10


def _circle_rule(count: int) -> Tuple[np.ndarray, np.ndarray]:
    angles = 2.0 * np.pi * (np.arange(count) + 0.5) / count
    nodes = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return nodes, np.full(count, 1.0 / count)


def _lift(subsphere: Tuple[np.ndarray, np.ndarray], polar_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Extend a rule on S^{k-1} to S^k through t = cos(psi) on Gauss-Jacobi nodes."""
    sub_nodes, sub_weights = subsphere
    k = sub_nodes.shape[1]
    alpha = (k - 2) / 2.0
    t, w = roots_jacobi(polar_nodes, alpha, alpha)
    w = w / np.sum(w)
    radial = np.sqrt(1.0 - t * t)
    nodes = np.concatenate(
        [
            np.repeat(t, sub_nodes.shape[0])[:, None],
            (radial[:, None, None] * sub_nodes[None, :, :]).reshape(-1, k),
        ],
        axis=1,
    )
    weights = np.outer(w, sub_weights).ravel()
    return nodes, weights


def exact_moment(exponents: Tuple[int, ...]) -> float:
    """Mean of prod x_i^{a_i} over the round sphere S^{n-1} in R^n."""
    if any(a % 2 for a in exponents):
        return 0.0
    n = len(exponents)
    halves = [(a + 1) / 2.0 for a in exponents]
    log_value = (
        sum(gammaln(h) for h in halves)
        + gammaln(n / 2.0)
        - gammaln(sum(halves))
        - (n / 2.0) * np.log(np.pi)
    )
    return float(np.exp(log_value))


def validate_quadrature(quad: SphereQuadrature, degree: int) -> float:
    """Largest monomial integration error up to the given degree."""
    directions = quad.nodes[:, 1:]
    n = directions.shape[1]
    worst = 0.0
    for total in range(degree + 1):
        for split in itertools.combinations_with_replacement(range(n), total):
            exponents = tuple(split.count(i) for i in range(n))
            values = np.prod(directions ** np.array(exponents), axis=1)
            error = abs(float(np.sum(quad.weights * values)) - exact_moment(exponents))
            worst = max(worst, error)
    return worst


@lru_cache(maxsize=32)
def sphere_quadrature(dim: int, num_nodes: int) -> SphereQuadrature:
    """Quadrature on the boundary sphere of H^dim with about num_nodes nodes.

    Args:
        dim: Hyperbolic dimension n (the sphere is S^{n-1}).
        num_nodes: Requested node count; product rules round it down.

    Returns:
        SphereQuadrature: validated rule with its exactness degree.

    Raises:
        DimensionError: If dim < 2 or num_nodes is too small.
    """
    if dim < 2:
        raise DimensionError(f"Boundary quadrature needs n >= 2, got {dim}")
    if dim == 2:
        if num_nodes < 3:
            raise DimensionError(f"Circle rule needs at least 3 nodes, got {num_nodes}")
        nodes, weights = _circle_rule(num_nodes)
        order = num_nodes - 1
    else:
        polar = int(np.floor((num_nodes / 2.0) ** (1.0 / (dim - 1)) + 1e-9))
        if polar < 2:
            raise DimensionError(f"{num_nodes} nodes are too few for S^{dim - 1}")
        rule = _circle_rule(2 * polar)
        for _ in range(dim - 2):
            rule = _lift(rule, polar)
        nodes, weights = rule
        order = 2 * polar - 1
    weights = weights / np.sum(weights)
    ideal = np.concatenate([np.ones((nodes.shape[0], 1)), nodes], axis=1)
    quad = SphereQuadrature(nodes=ideal, weights=weights, order=order)
    error = validate_quadrature(quad, min(order, MAX_VALIDATED_DEGREE))
    if error > VALIDATION_TOL:
        raise DimensionError(f"Quadrature failed moment validation (error {error:.3e})")
    logger.debug(f"Built S^{dim - 1} quadrature with {quad.size} nodes, exact to degree {order}")
    return quad
