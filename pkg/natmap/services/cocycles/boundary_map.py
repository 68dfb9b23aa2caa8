"""Boundary maps given slice by slice as chains of sphere diffeomorphisms."""

from __future__ import annotations

import logging
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from natmap.schemas.cocycle import (
    BendStep,
    BoundaryMapSpec,
    BoundaryStep,
    Cocycle,
    EmbedStep,
    EquivarianceReport,
    IsometryStep,
    SquashStep,
)
from natmap.services.cocycles.cocycle import evaluate, random_word
from natmap.services.cocycles.space import act_word
from natmap.services.errors import DimensionError, InadmissibleMeasureError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.lattice.groups import evaluate_word

logger = logging.getLogger(__name__)

SEPARATION_TOL = 1e-10
_POLE_TOL = 1e-14


def _squash(directions: np.ndarray, center: np.ndarray, kappa: float) -> np.ndarray:
    """alpha -> 2 atan(tan(alpha/2)^kappa) for the angle alpha to the center, direction kept."""
    cosine = np.clip(directions @ center, -1.0, 1.0)
    alpha = np.arccos(cosine)
    normal = directions - cosine[:, None] * center
    length = np.linalg.norm(normal, axis=1)
    moved = length > _POLE_TOL
    out = directions.copy()
    squashed = 2.0 * np.arctan(np.tan(alpha[moved] / 2.0) ** kappa)
    unit = normal[moved] / length[moved, None]
    out[moved] = np.cos(squashed)[:, None] * center + np.sin(squashed)[:, None] * unit
    return out


def _bend(directions: np.ndarray, amplitude: float, frequency: int) -> np.ndarray:
    """Scale the stereographic chart about the last axis by exp(A Re((x1 + i x2)^k))."""
    pole = directions[:, -1]
    regular = 1.0 + pole > _POLE_TOL
    out = directions.copy()
    eta = directions[regular]
    chart = eta[:, :-1] / (1.0 + eta[:, -1:])
    scale = np.exp(amplitude * np.real((eta[:, 0] + 1j * eta[:, 1]) ** frequency))
    chart = chart * scale[:, None]
    norm2 = np.sum(chart * chart, axis=1, keepdims=True)
    out[regular] = np.concatenate([2.0 * chart, 1.0 - norm2], axis=1) / (1.0 + norm2)
    return out


def apply_step(step: BoundaryStep, xi: np.ndarray) -> np.ndarray:
    """Apply one chain step to a stack of normalized ideal points."""
    dim = xi.shape[-1] - 1
    if isinstance(step, IsometryStep):
        hyp.point_dimension(step.matrix[0], dim)
        return hyp.apply_boundary(step.matrix, xi)
    if isinstance(step, EmbedStep):
        return hyp.geodesic_embed(xi, step.target_dim)
    if isinstance(step, SquashStep):
        center = np.asarray(step.center, dtype=float)
        if center.shape != (dim,):
            raise DimensionError(f"Squash center needs {dim} coordinates, got {center.shape[0]}")
        center = center / np.linalg.norm(center)
        directions = _squash(xi[:, 1:], center, step.kappa)
        return np.concatenate([np.ones((xi.shape[0], 1)), directions], axis=1)
    if isinstance(step, BendStep):
        if dim < 3:
            raise DimensionError(f"Bend needs a sphere of dimension >= 2, got S^{dim - 1}")
        directions = _bend(xi[:, 1:], step.amplitude, step.frequency)
        return np.concatenate([np.ones((xi.shape[0], 1)), directions], axis=1)
    raise DimensionError(f"Unknown boundary step {step!r}")


def apply_slice(steps: Sequence[BoundaryStep], xi: np.ndarray) -> np.ndarray:
    """phi_x on a single ideal point or a stack of them."""
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    out = hyp.normalize_ideal(np.atleast_2d(xi))
    for step in steps:
        out = hyp.normalize_ideal(apply_step(step, out))
    return out[0] if single else out


def slice_target_dim(steps: Sequence[BoundaryStep], source_dim: int) -> int:
    dim = source_dim
    for step in steps:
        if isinstance(step, EmbedStep):
            if step.target_dim < dim:
                raise DimensionError(f"Cannot embed S^{dim - 1} into S^{step.target_dim - 1}")
            dim = step.target_dim
        elif isinstance(step, IsometryStep) and step.matrix.shape[0] != dim + 1:
            raise DimensionError(f"Isometry step of H^{step.matrix.shape[0] - 1} applied on H^{dim}")
    return dim


def target_dim(phi: BoundaryMapSpec) -> int:
    dims = {slice_target_dim(steps, phi.source_dim) for steps in phi.slices}
    if len(dims) != 1:
        raise DimensionError(f"Slices land in different spheres: {sorted(dims)}")
    return dims.pop()


def standard_boundary_map(
    n: int, m: int, size: int, extra: Optional[Sequence[BoundaryStep]] = None
) -> BoundaryMapSpec:
    """Every slice is the boundary of the embedding j_{n,m}, followed by the extra steps."""
    steps: List[BoundaryStep] = [EmbedStep(target_dim=m)] + list(extra or [])
    return BoundaryMapSpec(source_dim=n, slices=[list(steps) for _ in range(size)])


def twist_boundary(phi: BoundaryMapSpec, f: np.ndarray) -> BoundaryMapSpec:
    """phi^f(xi, x) = f(x)^-1 phi(xi, x): the inverse isometry runs after each slice."""
    f = np.asarray(f, dtype=float)
    if f.shape[0] != len(phi.slices):
        raise DimensionError(f"Twist gives {f.shape[0]} isometries for {len(phi.slices)} slices")
    slices = [
        list(steps) + [IsometryStep(matrix=hyp.inverse_isometry(fx))]
        for steps, fx in zip(phi.slices, f)
    ]
    return BoundaryMapSpec(source_dim=phi.source_dim, slices=slices)


def slice_separation(steps: Sequence[BoundaryStep], nodes: np.ndarray) -> float:
    """Smallest distance between images of distinct nodes."""
    images = apply_slice(steps, nodes)[:, 1:]
    distances, _ = cKDTree(images).query(images, k=2)
    return float(np.min(distances[:, 1]))


def check_injective(phi: BoundaryMapSpec, nodes: np.ndarray, tol: float = SEPARATION_TOL) -> float:
    """Injectivity scan of every slice over a node set.

    Raises:
        InadmissibleMeasureError: If two nodes have images closer than tol.
    """
    worst = min(slice_separation(steps, nodes) for steps in phi.slices)
    if worst <= tol:
        raise InadmissibleMeasureError(f"A slice is not injective on the nodes (separation {worst:.3e})")
    return worst


def check_equivariance(
    sigma: Cocycle,
    phi: BoundaryMapSpec,
    samples: int,
    rng: np.random.Generator,
    max_length: int = 4,
) -> EquivarianceReport:
    """Max deviation of phi_{gx}(g xi) from sigma(g, x) phi_x(xi) over random (g, x, xi)."""
    if len(phi.slices) != sigma.space.size or phi.source_dim != sigma.source_dim:
        raise DimensionError("Boundary map and cocycle live over different spaces")
    worst, worst_word, worst_point = 0.0, (), 0
    for _ in range(samples):
        word = random_word(sigma.group.rank, rng, max_length)
        x = int(rng.integers(sigma.space.size))
        xi = hyp.random_ideal_point(phi.source_dim, rng)
        gx = act_word(sigma.space, word, x)
        moved = hyp.apply_boundary(evaluate_word(sigma.group, word), xi)
        lhs = apply_slice(phi.slices[gx], moved)
        rhs = hyp.apply_boundary(evaluate(sigma, word, x), apply_slice(phi.slices[x], xi))
        deviation = float(np.max(np.abs(lhs - rhs)))
        if deviation > worst:
            worst, worst_word, worst_point = deviation, word, x
    logger.info(f"Equivariance scan over {samples} samples: max deviation {worst:.3e}")
    return EquivarianceReport(
        samples=samples, max_deviation=worst, worst_word=list(worst_word), worst_point=worst_point
    )


def slice_key(steps: Sequence[BoundaryStep]) -> tuple:
    """Hashable identity of a slice chain; equal keys give equal slices."""
    key = []
    for step in steps:
        if isinstance(step, IsometryStep):
            key.append((step.kind, step.matrix.shape, step.matrix.tobytes()))
        else:
            key.append(repr(step.model_dump()))
    return tuple(key)
