"""Volume of equivariant maps over a fundamental domain, with a refinement error estimate."""

from __future__ import annotations

import logging
from typing import List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from natmap.schemas.cocycle import BoundaryMapSpec, Cocycle
from natmap.schemas.lattice import FundamentalDomain
from natmap.schemas.measure import SphereQuadrature
from natmap.schemas.volume import CellRecord, VolumeReport
from natmap.services.cocycles.boundary_map import check_equivariance, check_injective
from natmap.services.errors import NatmapError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.lattice.octagon import coarsened
from natmap.services.natural_map.evaluator import build_evaluator
from natmap.services.volume.maps import EquivariantMapSpec, NaturalMapSpec

logger = logging.getLogger(__name__)

CHUNK_CELLS = 64
MAXIMAL_FACTOR = 3.0
MILNOR_WOOD_SLACK = 5e-4
ERROR_FLOOR = 1e-8
EQUIVARIANCE_TOL = 1e-7


def _evaluate_chunk(phi: EquivariantMapSpec, points: np.ndarray) -> np.ndarray:
    """Cell values for a block of points; failed cells come back as NaN rows."""
    out = np.full((points.shape[0], phi.space_size, 4), np.nan)
    for index, a in enumerate(points):
        try:
            out[index] = phi.cell_values(a)
        except NatmapError as exc:
            logger.warning(f"Cell at {np.round(a, 6).tolist()} failed: {exc}")
    return out


def evaluate_cells(
    phi: EquivariantMapSpec,
    domain: FundamentalDomain,
    parallelism: int = 1,
    progress: bool = False,
) -> np.ndarray:
    """(cells, |X|, 4) array of (jac, s_min, s_max, residual), in cell order.

    Chunks are dispatched to a joblib pool and collected in submission order,
    so the result does not depend on the worker count.
    """
    starts = range(0, domain.size, CHUNK_CELLS)
    tasks = (delayed(_evaluate_chunk)(phi, domain.points[s : s + CHUNK_CELLS]) for s in starts)
    chunks = Parallel(n_jobs=parallelism)(
        tqdm(tasks, total=len(starts), desc=f"{phi.kind} cells", disable=not progress)
    )
    return np.concatenate(chunks, axis=0)


def _reduce(
    phi: EquivariantMapSpec, domain: FundamentalDomain, values: np.ndarray
) -> Tuple[float, np.ndarray, np.ndarray]:
    weights_x = np.asarray(phi.cocycle.space.weights)
    jac = np.nan_to_num(values[:, :, 0], nan=0.0)
    cell_weights = np.asarray(domain.weights)
    per_x = np.sum(cell_weights[:, None] * jac, axis=0)
    volume = float(np.sum(cell_weights[:, None] * jac * weights_x[None, :]))
    failed = np.any(np.isnan(values[:, :, 0]), axis=1)
    return volume, per_x, failed


def verdict_for(volume: float, domain_volume: float, error: float, partial: bool) -> str:
    if partial or volume > domain_volume * (1.0 + MILNOR_WOOD_SLACK):
        return "inconclusive"
    if domain_volume - volume < MAXIMAL_FACTOR * error:
        return "maximal"
    return "strict"


def cell_records(
    domain: FundamentalDomain, values: np.ndarray
) -> List[CellRecord]:
    ball = hyp.to_ball(domain.points)
    records = []
    for cell in range(values.shape[0]):
        for x in range(values.shape[1]):
            jac, s_min, s_max, residual = (float(v) for v in values[cell, x])
            if not np.isfinite(jac):
                continue
            records.append(
                CellRecord(
                    cell=cell,
                    x=x,
                    ball=[float(c) for c in ball[cell]],
                    weight=float(domain.weights[cell]),
                    jacobian=jac,
                    min_singular=s_min,
                    max_singular=s_max,
                    residual=residual,
                )
            )
    return records


def volume(
    phi: EquivariantMapSpec,
    domain: FundamentalDomain,
    parallelism: int = 1,
    estimate_error: bool = True,
    keep_records: bool = False,
    progress: bool = False,
    equivariance_deviation: Optional[float] = None,
) -> VolumeReport:
    """vol(Phi) = sum over cells and x of w_cell mu_X(x) jac(Phi_x).

    The error estimate compares the Milnor-Wood margin on the domain with the
    margin on the coarsened domain; failed cells mark the report partial.
    """
    values = evaluate_cells(phi, domain, parallelism, progress)
    vol, per_x, failed = _reduce(phi, domain, values)
    domain_volume = domain.total_volume

    coarse_volume = None
    error = ERROR_FLOOR * domain_volume
    if estimate_error:
        coarse = coarsened(domain)
        coarse_values = evaluate_cells(phi, coarse, parallelism, progress)
        coarse_volume, _, coarse_failed = _reduce(phi, coarse, coarse_values)
        failed_coarse = int(np.sum(coarse_failed))
        if failed_coarse:
            logger.warning(f"{failed_coarse} coarse cells failed")
        fine_margin = domain_volume - vol
        coarse_margin = coarse.total_volume - coarse_volume
        error += abs(fine_margin - coarse_margin)

    jac = values[:, :, 0]
    finite = jac[np.isfinite(jac)]
    failed_cells = int(np.sum(failed))
    partial = failed_cells > 0
    if partial:
        logger.warning(f"{failed_cells} of {domain.size} cells failed; the report is partial")
    report = VolumeReport(
        volume=vol,
        per_x=[float(v) for v in per_x],
        domain_volume=domain_volume,
        jacobian_min=float(np.min(finite)) if finite.size else 0.0,
        jacobian_mean=float(np.mean(finite)) if finite.size else 0.0,
        jacobian_max=float(np.max(finite)) if finite.size else 0.0,
        milnor_wood_margin=domain_volume - vol,
        error_estimate=error,
        coarse_volume=coarse_volume,
        verdict=verdict_for(vol, domain_volume, error, partial),
        partial=partial,
        failed_cells=failed_cells,
        map_kind=phi.kind,
        equivariance_deviation=equivariance_deviation,
        cells=domain.size,
        space_size=phi.space_size,
        records=cell_records(domain, values) if keep_records else [],
    )
    logger.info(
        f"Volume of {phi.kind} map over {domain.label}: {vol:.10f} of {domain_volume:.10f} "
        f"(error {error:.2e}, verdict {report.verdict})"
    )
    return report


def natural_volume(
    sigma: Cocycle,
    phi: BoundaryMapSpec,
    domain: FundamentalDomain,
    quad: SphereQuadrature,
    tol: float = 1e-10,
    parallelism: int = 1,
    rng: Optional[np.random.Generator] = None,
    equivariance_samples: int = 20,
    estimate_error: bool = True,
    keep_records: bool = False,
    progress: bool = False,
) -> VolumeReport:
    """nv(sigma): the volume of the natural map of (sigma, phi).

    The slices are scanned for injectivity on the quadrature nodes and phi is
    spot-checked for equivariance; the deviation is reported, not enforced.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    check_injective(phi, quad.nodes)
    deviation = check_equivariance(sigma, phi, equivariance_samples, rng).max_deviation
    if deviation > EQUIVARIANCE_TOL:
        logger.warning(f"Boundary map deviates from equivariance by {deviation:.3e}")
    evaluator = build_evaluator(sigma, phi, quad, tol=tol)
    return volume(
        NaturalMapSpec(evaluator),
        domain,
        parallelism=parallelism,
        estimate_error=estimate_error,
        keep_records=keep_records,
        progress=progress,
        equivariance_deviation=deviation,
    )
