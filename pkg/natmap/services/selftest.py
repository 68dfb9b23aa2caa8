"""A fixed suite of invariant checks at small sizes."""

from __future__ import annotations

import logging
from typing import Callable, List, Tuple

import numpy as np

from natmap.schemas.measure import BoundaryMeasure
from natmap.schemas.report import SelftestCheck, SelftestReport
from natmap.services.barycenter.solver import barycenter
from natmap.services.cocycles.boundary_map import standard_boundary_map
from natmap.services.cocycles.cocycle import (
    cocycle_identity_defect,
    random_twist,
    random_word,
    standard_cocycle,
    twist,
)
from natmap.services.cocycles.space import coset_space, trivial_space
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.lattice.groups import relator_defects
from natmap.services.lattice.octagon import genus2_octagon
from natmap.services.measures.boundary_measure import visual_weights
from natmap.services.measures.quadrature import sphere_quadrature, validate_quadrature
from natmap.services.natural_map.evaluator import build_evaluator, differential, jacobian
from natmap.services.volume.integrator import natural_volume

logger = logging.getLogger(__name__)

Check = Callable[[np.random.Generator], Tuple[float, float]]


def _busemann_cocycle(rng: np.random.Generator) -> Tuple[float, float]:
    worst = 0.0
    for _ in range(50):
        a, b, c = (hyp.random_point(3, rng, 3.0) for _ in range(3))
        xi = hyp.random_ideal_point(3, rng)
        gap = hyp.busemann(b, a, xi) - (hyp.busemann(c, a, xi) - hyp.busemann(c, b, xi))
        worst = max(worst, abs(float(gap)))
    return worst, 1e-10


def _quadrature(rng: np.random.Generator) -> Tuple[float, float]:
    errors = [validate_quadrature(sphere_quadrature(n, 512), 6) for n in (2, 3)]
    return max(errors), 1e-10


def _barycenter_symmetric(rng: np.random.Generator) -> Tuple[float, float]:
    angles = 2.0 * np.pi * np.arange(3) / 3.0
    nu = BoundaryMeasure.from_weights(
        hyp.ideal_point(np.stack([np.cos(angles), np.sin(angles)], axis=1)), np.ones(3)
    )
    return float(np.max(np.abs(barycenter(nu).point - hyp.origin(2)))), 1e-9


def _barycenter_equivariance(rng: np.random.Generator) -> Tuple[float, float]:
    worst = 0.0
    for _ in range(10):
        points = np.stack([hyp.random_ideal_point(3, rng) for _ in range(5)])
        nu = BoundaryMeasure.from_weights(points, 0.5 + rng.random(5))
        g = hyp.random_isometry(3, rng)
        moved = BoundaryMeasure.from_weights(hyp.apply_boundary(g, points), nu.weights)
        expected = hyp.apply_isometry(g, barycenter(nu).point)
        worst = max(worst, float(np.max(np.abs(barycenter(moved).point - expected))))
    return worst, 1e-7


def _visual_density(rng: np.random.Generator) -> Tuple[float, float]:
    quad = sphere_quadrature(3, 512)
    a, b = hyp.random_point(3, rng, 2.0), hyp.random_point(3, rng, 2.0)
    ratio = visual_weights(a, quad) / visual_weights(b, quad)
    expected = np.exp(-2.0 * hyp.busemann(b, a, quad.nodes))
    return float(np.max(np.abs(ratio / expected - 1.0))), 1e-9


def _octagon(rng: np.random.Generator) -> Tuple[float, float]:
    group, domain = genus2_octagon(10, 5)
    return max(max(relator_defects(group)), abs(domain.total_volume - 4.0 * np.pi)), 1e-3


def _standard_differential(rng: np.random.Generator) -> Tuple[float, float]:
    group, _ = genus2_octagon(4, 2)
    space = trivial_space(group, 1)
    ev = build_evaluator(
        standard_cocycle(group, space, 3), standard_boundary_map(2, 3, 1), sphere_quadrature(2, 256)
    )
    a = hyp.random_point(2, rng, 1.0)
    diff = differential(ev, a, 0)
    expected = np.vstack([np.eye(2), np.zeros((1, 2))])
    return max(float(np.max(np.abs(diff.matrix - expected))), abs(jacobian(diff) - 1.0)), 1e-6


def _twisted_cocycle(rng: np.random.Generator) -> Tuple[float, float]:
    group, _ = genus2_octagon(4, 2)
    sigma = standard_cocycle(group, coset_space(group, (1, 0, 0, 0)), 3)
    f = random_twist(2, 3, rng)
    twisted = twist(sigma, f)
    back = twist(twisted, np.stack([hyp.inverse_isometry(fx) for fx in f]))
    pairs = [(random_word(4, rng), random_word(4, rng)) for _ in range(10)]
    roundtrip = float(np.max(np.abs(back.values - sigma.values)))
    return max(roundtrip, cocycle_identity_defect(twisted, pairs)), 1e-8


def _natural_volume(rng: np.random.Generator) -> Tuple[float, float]:
    group, domain = genus2_octagon(8, 4)
    space = trivial_space(group, 1)
    report = natural_volume(
        standard_cocycle(group, space, 3),
        standard_boundary_map(2, 3, 1),
        domain,
        sphere_quadrature(2, 256),
        rng=rng,
    )
    passed_verdict = 0.0 if report.verdict == "maximal" else 1.0
    return max(abs(report.milnor_wood_margin), passed_verdict), 1e-6


CHECKS: List[Tuple[str, Check]] = [
    ("busemann-cocycle", _busemann_cocycle),
    ("sphere-quadrature", _quadrature),
    ("barycenter-symmetric", _barycenter_symmetric),
    ("barycenter-equivariance", _barycenter_equivariance),
    ("visual-density-ratio", _visual_density),
    ("genus2-octagon", _octagon),
    ("standard-differential", _standard_differential),
    ("twisted-cocycle", _twisted_cocycle),
    ("natural-volume-standard", _natural_volume),
]


def run_selftest(seed: int = 0) -> SelftestReport:
    rng = np.random.default_rng(seed)
    checks = []
    for name, check in CHECKS:
        value, threshold = check(rng)
        passed = bool(np.isfinite(value) and value <= threshold)
        if not passed:
            logger.warning(f"Selftest check {name} failed: {value:.3e} > {threshold:.1e}")
        checks.append(SelftestCheck(name=name, passed=passed, value=float(value), threshold=threshold))
    logger.info(f"Selftest: {sum(c.passed for c in checks)}/{len(checks)} checks passed")
    return SelftestReport(checks=checks)
