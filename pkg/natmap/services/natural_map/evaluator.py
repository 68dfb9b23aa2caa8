"""The natural map F(a, x) = bar((phi_x)_* nu_a) and its slice differential."""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from natmap.schemas.barycenter import BarycenterResult
from natmap.schemas.cocycle import BoundaryMapSpec, Cocycle
from natmap.schemas.measure import BoundaryMeasure, SphereQuadrature
from natmap.schemas.natural_map import NaturalMapEvaluator, SliceDifferential
from natmap.services.barycenter.solver import barycenter
from natmap.services.cocycles.boundary_map import apply_slice
from natmap.services.errors import DegenerateSupportError, DimensionError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.measures.boundary_measure import (
    critical_exponent,
    pushforward,
    visual_weights,
)

logger = logging.getLogger(__name__)

MIN_K_EIG = 1e-10
ISOMETRIC_BAND = 1e-3


def build_evaluator(
    cocycle: Cocycle,
    boundary: BoundaryMapSpec,
    quad: SphereQuadrature,
    tol: float = 1e-10,
    max_iter: int = 100,
) -> NaturalMapEvaluator:
    return NaturalMapEvaluator(cocycle=cocycle, boundary=boundary, quad=quad, tol=tol, max_iter=max_iter)


def _slice_steps(ev: NaturalMapEvaluator, x: int):
    if not 0 <= x < len(ev.boundary.slices):
        raise DimensionError(f"Point {x} is not in the space of size {len(ev.boundary.slices)}")
    return ev.boundary.slices[x]


def slice_measure(ev: NaturalMapEvaluator, a: np.ndarray, x: int) -> BoundaryMeasure:
    """(phi_x)_* nu_a, with coincident images merged and admissibility checked."""
    steps = _slice_steps(ev, x)
    a = hyp.check_point(a)
    hyp.point_dimension(a, ev.source_dim)
    nu = BoundaryMeasure.from_weights(ev.quad.nodes, visual_weights(a, ev.quad))
    return pushforward(nu, lambda xi: apply_slice(steps, xi))


def solve_slice(
    ev: NaturalMapEvaluator, a: np.ndarray, x: int, start: Optional[np.ndarray] = None
) -> BarycenterResult:
    """Barycenter solve behind F(a, x).

    Raises:
        InadmissibleMeasureError: If the slice merges nodes into an atom of weight >= 1/2.
        ConvergenceError: If the barycenter solver does not converge.
    """
    return barycenter(slice_measure(ev, a, x), tol=ev.tol, max_iter=ev.max_iter, start=start)


def natural_point(ev: NaturalMapEvaluator, a: np.ndarray, x: int) -> np.ndarray:
    """F(a, x) as a point of H^m."""
    return solve_slice(ev, a, x).point


def _node_terms(
    ev: NaturalMapEvaluator, a: np.ndarray, x: int, point: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Visual weights at a with the frame gradients at a (source) and at F_x(a) (target)."""
    weights = visual_weights(a, ev.quad)
    weights = weights / np.sum(weights)
    images = apply_slice(_slice_steps(ev, x), ev.quad.nodes)
    source = hyp.frame_busemann_gradients(a, ev.quad.nodes)
    target = hyp.frame_busemann_gradients(point, images)
    return weights, source, target


def differential(
    ev: NaturalMapEvaluator,
    a: np.ndarray,
    x: int,
    solution: Optional[BarycenterResult] = None,
) -> SliceDifferential:
    """D_a F_x from the differentiated implicit equation.

    With Bn, Bm the frame gradients of the Busemann functions at a and at F_x(a),
    H' = sum w Bn Bn^T, H = sum w Bm Bm^T, K = I - H and
    D_a F_x = delta K^{-1} sum w Bm Bn^T.

    Raises:
        DegenerateSupportError: If K is numerically singular.
    """
    a = hyp.check_point(np.asarray(a, dtype=float))
    solution = solve_slice(ev, a, x) if solution is None else solution
    weights, source, target = _node_terms(ev, a, x, solution.point)
    delta = critical_exponent(ev.source_dim)
    hp = source.T @ (weights[:, None] * source)
    h = target.T @ (weights[:, None] * target)
    k = np.eye(ev.target_dim) - h
    min_eig = float(np.linalg.eigvalsh(k)[0])
    if min_eig < MIN_K_EIG:
        raise DegenerateSupportError(
            f"Form K is singular at x={x} (smallest eigenvalue {min_eig:.3e})"
        )
    matrix = delta * np.linalg.solve(k, target.T @ (weights[:, None] * source))
    return SliceDifferential(
        base=a,
        x=x,
        point=solution.point,
        matrix=matrix,
        hp=hp,
        h=h,
        k=k,
        delta=delta,
        residual=solution.residual,
    )


def jacobian(diff: SliceDifferential, p: Optional[int] = None) -> float:
    """Product of the p largest singular values of D_a F_x; p defaults to n."""
    p = diff.source_dim if p is None else p
    if not 1 <= p <= diff.source_dim:
        raise DimensionError(f"Jacobian order must be in [1, {diff.source_dim}], got {p}")
    return float(np.prod(diff.singular_values[:p]))


def is_isometric(diff: SliceDifferential, band: float = ISOMETRIC_BAND) -> bool:
    """All singular values within band of 1, i.e. D_a F_x is an isometric embedding."""
    return bool(np.all(np.abs(diff.singular_values - 1.0) <= band))


def implicit_residual(ev: NaturalMapEvaluator, a: np.ndarray, x: int, point: np.ndarray) -> float:
    """g-norm of sum_i w_i grad beta(point, phi_x(xi_i)) for the visual weights at a."""
    weights, _, target = _node_terms(ev, hyp.check_point(a), x, point)
    return float(np.linalg.norm(weights @ target))
