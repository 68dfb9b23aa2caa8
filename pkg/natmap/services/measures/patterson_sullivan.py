"""Orbit sums: truncated Poincare series and the Patterson construction."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from natmap.schemas.lattice import GroupPresentation, OrbitBall
from natmap.schemas.measure import BoundaryMeasure
from natmap.services.errors import DegenerateMeasureError, DimensionError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.lattice.groups import orbit_ball
from natmap.services.measures.boundary_measure import critical_exponent

logger = logging.getLogger(__name__)

DEFAULT_EXPONENT_SCALE = 1.05


def poincare_series(
    group: GroupPresentation,
    s: float,
    x: Optional[np.ndarray] = None,
    radius: float = 10.0,
    orbit: Optional[OrbitBall] = None,
) -> float:
    """P(s; x) = sum of exp(-s d(gamma x, x)) over orbit points within radius.

    A precomputed orbit ball of x may be passed to evaluate several exponents.
    """
    if s <= 0 or radius <= 0:
        raise ValueError(f"Poincare series needs s > 0 and R > 0, got s={s}, R={radius}")
    if orbit is None:
        orbit = orbit_ball(group, radius, base=x)
    distances = orbit.distances[orbit.distances <= radius]
    # pairwise summation over sorted terms
    return float(np.sum(np.sort(np.exp(-s * distances))))


def ps_orbit_measure(
    group: GroupPresentation,
    s: Optional[float] = None,
    a: Optional[np.ndarray] = None,
    radius: float = 10.0,
    orbit: Optional[OrbitBall] = None,
) -> BoundaryMeasure:
    """Patterson measure: atoms at the radial projections of gamma o, weights exp(-s d(a, gamma o)).

    The identity term has no boundary projection and is dropped. The exponent
    defaults to DEFAULT_EXPONENT_SCALE times the critical exponent.

    Raises:
        DegenerateMeasureError: If the orbit ball holds no point besides the base point.
    """
    s = DEFAULT_EXPONENT_SCALE * critical_exponent(group.dim) if s is None else s
    if s <= 0 or radius <= 0:
        raise ValueError(f"Patterson measure needs s > 0 and R > 0, got s={s}, R={radius}")
    a = group.base if a is None else hyp.check_point(a)
    if orbit is None:
        orbit = orbit_ball(group, radius)
    if orbit.points.shape[1] != a.shape[0]:
        raise DimensionError("Orbit and base point live in different dimensions")
    keep = (orbit.distances > 0.0) & (orbit.distances <= radius)
    if not np.any(keep):
        raise DegenerateMeasureError(f"Orbit ball of radius {radius} has no non-trivial point")
    points = orbit.points[keep]
    weights = np.exp(-s * hyp.distance(a, points))
    logger.info(f"Patterson measure at s={s:.4f}: {points.shape[0]} atoms")
    return BoundaryMeasure.from_weights(hyp.ideal_point(points[:, 1:]), weights)
