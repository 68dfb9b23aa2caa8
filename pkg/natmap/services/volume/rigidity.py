"""Rigidity audit: recover the conjugating isometries of a maximal cocycle, and representation volumes."""

from __future__ import annotations

import logging
from typing import Dict, Hashable, List, Optional

import numpy as np
from scipy.linalg import null_space

from natmap.schemas.cocycle import BoundaryMapSpec, BoundaryStep
from natmap.schemas.lattice import FundamentalDomain, GroupPresentation
from natmap.schemas.measure import SphereQuadrature
from natmap.schemas.natural_map import NaturalMapEvaluator
from natmap.schemas.volume import RigidityReport, VolumeReport
from natmap.services.cocycles.boundary_map import slice_key
from natmap.services.cocycles.cocycle import rep_cocycle
from natmap.services.cocycles.space import trivial_space
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.natural_map.evaluator import natural_point
from natmap.services.volume.integrator import natural_volume

logger = logging.getLogger(__name__)

FIT_RADIUS = 1.0
INCONSISTENT_RESIDUAL = 1e-4


def minkowski_orthonormalize(columns: np.ndarray) -> np.ndarray:
    """Gram-Schmidt for the Minkowski form; the first column is timelike, the rest spacelike."""
    out = np.array(columns, dtype=float)
    for j in range(out.shape[1]):
        for i in range(j):
            out[:, j] -= hyp.mdot(out[:, j], out[:, i]) / hyp.mdot(out[:, i], out[:, i]) * out[:, i]
        out[:, j] /= np.sqrt(abs(float(hyp.mdot(out[:, j], out[:, j]))))
    return out


def complete_isometry(columns: np.ndarray) -> np.ndarray:
    """Extend Minkowski-orthonormal columns (first timelike) to an element of O(m, 1)."""
    dim = columns.shape[0] - 1
    form = hyp.minkowski_form(dim)
    complement = null_space(columns.T @ form)
    matrix = np.concatenate([columns, complement], axis=1)
    matrix = minkowski_orthonormalize(matrix)
    if matrix[0, 0] < 0:
        matrix = -matrix
    return matrix


def fit_slice(
    ev: NaturalMapEvaluator, x: int, samples: np.ndarray
) -> tuple:
    """Isometry T with F_x ~ T j_{n,m}, fitted on the sample points, and its max residual."""
    n = ev.source_dim
    images = np.stack([natural_point(ev, a, x) for a in samples])
    first, *_ = np.linalg.lstsq(samples, images, rcond=None)
    columns = minkowski_orthonormalize(first.T)
    if columns[0, 0] < 0:
        columns[:, 0] = -columns[:, 0]
    matrix = complete_isometry(columns)
    predicted = samples @ matrix[:, : n + 1].T
    residual = float(np.max(np.abs(predicted - images)))
    return matrix, residual


def rigidity_audit(
    report: VolumeReport,
    ev: NaturalMapEvaluator,
    rng: np.random.Generator,
    twist: Optional[np.ndarray] = None,
) -> RigidityReport:
    """For a maximal report, recover f(x) with F_x = f(x)^-1 j_{n,m} for every x.

    When a known twist f0 is given, the recovered f(x)^-1 is compared with
    f0(x)^-1 on its first n+1 columns, which is agreement up to the stabilizer
    of j_{n,m}(H^n).
    """
    if report.verdict != "maximal":
        return RigidityReport(verdict=report.verdict, attempted=False)
    n = ev.source_dim
    samples = np.stack([hyp.random_point(n, rng, FIT_RADIUS) for _ in range(2 * (n + 1))])
    fitted: Dict[Hashable, tuple] = {}
    isometries: List[np.ndarray] = []
    worst = 0.0
    for x in range(ev.cocycle.space.size):
        key = slice_key(ev.boundary.slices[x])
        if key not in fitted:
            fitted[key] = fit_slice(ev, x, samples)
        matrix, residual = fitted[key]
        worst = max(worst, residual)
        isometries.append(hyp.inverse_isometry(matrix))

    twist_deviation = None
    if twist is not None:
        recovered = np.stack([hyp.inverse_isometry(f) for f in isometries])[:, :, : n + 1]
        expected = hyp.inverse_isometry(np.asarray(twist, dtype=float))[:, :, : n + 1]
        twist_deviation = float(np.max(np.abs(recovered - expected)))

    inconsistent = worst > INCONSISTENT_RESIDUAL
    if inconsistent:
        logger.warning(f"Maximal verdict but rigidity fit residual is {worst:.3e}")
    logger.info(f"Rigidity fit over {len(fitted)} distinct slices: residual {worst:.3e}")
    return RigidityReport(
        verdict=report.verdict,
        attempted=True,
        max_residual=worst,
        inconsistent=inconsistent,
        isometries=[[[float(c) for c in row] for row in f] for f in isometries],
        twist_deviation=twist_deviation,
    )


def representation_volume(
    group: GroupPresentation,
    images: np.ndarray,
    boundary: List[BoundaryStep],
    domain: FundamentalDomain,
    quad: SphereQuadrature,
    **kwargs,
) -> VolumeReport:
    """Volume of a representation through the natural volume of its cocycle over one point."""
    space = trivial_space(group, size=1)
    sigma = rep_cocycle(group, images, space)
    phi = BoundaryMapSpec(source_dim=group.dim, slices=[list(boundary)])
    return natural_volume(sigma, phi, domain, quad, **kwargs)
