"""Mapping-degree experiments: volume ratios along coverings."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from natmap.schemas.cocycle import BoundaryMapSpec, Cocycle
from natmap.schemas.degree import CoveringMap, DegreeReport
from natmap.schemas.measure import SphereQuadrature
from natmap.services.cocycles.boundary_map import check_equivariance, check_injective
from natmap.services.degree.covering import pullback_cocycle, pullback_map
from natmap.services.natural_map.evaluator import build_evaluator
from natmap.services.volume.integrator import EQUIVARIANCE_TOL, volume
from natmap.services.volume.maps import FoldedMapSpec, NaturalMapSpec

logger = logging.getLogger(__name__)


def degree_experiment(
    f: CoveringMap,
    sigma: Cocycle,
    phi: BoundaryMapSpec,
    quad: SphereQuadrature,
    tol: float = 1e-10,
    parallelism: int = 1,
    rng: Optional[np.random.Generator] = None,
    estimate_error: bool = True,
    progress: bool = False,
) -> DegreeReport:
    """Compare deg(f) with vol(f*Phi)/vol(Phi) and nv(f*sigma)/nv(sigma).

    Phi is the natural map of (sigma, phi) extended from the Dirichlet domain
    of the target group. The natural volumes use the natural maps directly when
    phi passes the equivariance check; otherwise f*Phi stands in for the natural
    map of f*sigma and both ratios coincide. For coverings the counting function
    equals the degree.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    check_injective(phi, quad.nodes)
    deviation = check_equivariance(sigma, phi, 20, rng).max_deviation
    target_map = NaturalMapSpec(build_evaluator(sigma, phi, quad, tol=tol))
    folded = FoldedMapSpec(target_map)
    options = dict(parallelism=parallelism, estimate_error=estimate_error, progress=progress)

    map_target = volume(folded, f.target_domain, **options)
    map_source = volume(pullback_map(f, folded), f.source_domain, **options)

    if deviation < EQUIVARIANCE_TOL:
        mode = "direct"
        pulled_sigma = pullback_cocycle(f, sigma)
        source_map = NaturalMapSpec(build_evaluator(pulled_sigma, phi, quad, tol=tol))
        nv_target = volume(target_map, f.target_domain, **options)
        nv_source = volume(source_map, f.source_domain, **options)
    else:
        mode = "folded"
        logger.warning(
            f"Boundary map is not equivariant (deviation {deviation:.3e}); natural volumes use folded maps"
        )
        nv_target, nv_source = map_target, map_source

    report = DegreeReport(
        degree=f.degree,
        counting=f.degree,
        source_volume=f.source_domain.total_volume,
        target_volume=f.target_domain.total_volume,
        map_volume_source=map_source.volume,
        map_volume_target=map_target.volume,
        map_ratio=map_source.volume / map_target.volume,
        natural_volume_source=nv_source.volume,
        natural_volume_target=nv_target.volume,
        natural_ratio=nv_source.volume / nv_target.volume,
        natural_map_mode=mode,
        equivariance_deviation=deviation,
        source_verdict=nv_source.verdict,
        target_verdict=nv_target.verdict,
    )
    logger.info(
        f"Degree experiment {f.label}: deg {f.degree}, natural ratio {report.natural_ratio:.6f}, "
        f"map ratio {report.map_ratio:.6f}"
    )
    return report
