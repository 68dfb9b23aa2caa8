"""Tests for equivariant maps, the volume integrator and the rigidity audit."""

from __future__ import annotations

import numpy as np
import pytest

from natmap.schemas.cocycle import BendStep, IsometryStep
from natmap.schemas.volume import VolumeReport
from natmap.services.cocycles.boundary_map import standard_boundary_map, twist_boundary
from natmap.services.cocycles.cocycle import random_twist, standard_cocycle, twist
from natmap.services.cocycles.space import coset_space, trivial_space
from natmap.services.errors import DegenerateSupportError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.lattice.groups import evaluate_word
from natmap.services.lattice.octagon import genus2_octagon
from natmap.services.natural_map.evaluator import build_evaluator
from natmap.services.volume.integrator import (
    evaluate_cells,
    natural_volume,
    verdict_for,
    volume,
)
from natmap.services.volume.maps import (
    ChainMapSpec,
    FoldedMapSpec,
    NaturalMapSpec,
    fold,
    map_equivariance,
)
from natmap.services.volume.rigidity import rigidity_audit, representation_volume

FOUR_PI = 4.0 * np.pi


class HalfFailingMap(ChainMapSpec):
    """Chain map whose slices fail on the half plane x_1 > 0."""

    def slice_values(self, a, x):
        if a[1] > 0.0:
            raise DegenerateSupportError("synthetic failure")
        return super().slice_values(a, x)


@pytest.fixture(scope="module")
def group_and_domain(coarse_genus2):
    return coarse_genus2


@pytest.fixture(scope="module")
def standard_report(group_and_domain, circle_quad):
    group, domain = group_and_domain
    sigma = standard_cocycle(group, trivial_space(group, 1), 3)
    return natural_volume(
        sigma, standard_boundary_map(2, 3, 1), domain, circle_quad, tol=1e-12, rng=np.random.default_rng(3)
    )


@pytest.fixture(scope="module")
def bend_map(group_and_domain, circle_quad):
    group, _ = group_and_domain
    sigma = standard_cocycle(group, trivial_space(group, 1), 3)
    phi = standard_boundary_map(2, 3, 1, [BendStep(amplitude=0.3, frequency=2)])
    return FoldedMapSpec(NaturalMapSpec(build_evaluator(sigma, phi, circle_quad, tol=1e-12)))


# ═══════════════════════════════════════════════════════════════════════════════
#                    CHAIN MAPS
# ═══════════════════════════════════════════════════════════════════════════════


class TestChainVolume:
    """Totally geodesic slices have Jacobian one everywhere."""

    def test_volume_is_domain_volume(self, group_and_domain):
        group, domain = group_and_domain
        report = volume(ChainMapSpec(standard_cocycle(group, trivial_space(group, 1), 3)), domain)
        assert report.volume == pytest.approx(domain.total_volume, rel=1e-12)
        assert report.verdict == "maximal"
        assert report.coarse_volume is not None
        assert report.jacobian_min == pytest.approx(1.0, abs=1e-12)

    def test_outer_isometries_do_not_change_volume(self, rng, group_and_domain):
        group, domain = group_and_domain
        sigma = standard_cocycle(group, trivial_space(group, 3), 3)
        plain = volume(ChainMapSpec(sigma), domain, estimate_error=False)
        moved = volume(ChainMapSpec(sigma, outer=random_twist(3, 3, rng)), domain, estimate_error=False)
        assert moved.volume == pytest.approx(plain.volume, abs=1e-10)
        assert moved.per_x == pytest.approx(plain.per_x, abs=1e-10)

    def test_parallel_run_is_identical(self, group_and_domain):
        group, domain = group_and_domain
        phi = ChainMapSpec(standard_cocycle(group, trivial_space(group, 2), 3))
        serial = evaluate_cells(phi, domain, parallelism=1)
        parallel = evaluate_cells(phi, domain, parallelism=2)
        assert np.array_equal(serial, parallel)

    def test_cell_records(self, group_and_domain):
        group, domain = group_and_domain
        phi = ChainMapSpec(standard_cocycle(group, trivial_space(group, 2), 3))
        report = volume(phi, domain, estimate_error=False, keep_records=True)
        assert len(report.records) == 2 * domain.size
        assert all(np.linalg.norm(r.ball) < 1.0 for r in report.records)
        assert sum(r.weight for r in report.records) == pytest.approx(2.0 * domain.total_volume)
        assert "records" not in report.model_dump()

    def test_failed_cells_make_report_partial(self, group_and_domain):
        group, domain = group_and_domain
        phi = HalfFailingMap(standard_cocycle(group, trivial_space(group, 1), 3))
        report = volume(phi, domain, estimate_error=False)
        assert report.partial
        assert 0 < report.failed_cells < domain.size
        assert report.verdict == "inconclusive"
        assert report.volume < domain.total_volume


class TestVerdict:
    """Maximal, strict and inconclusive outcomes."""

    def test_maximal_within_error(self):
        assert verdict_for(FOUR_PI - 1e-9, FOUR_PI, 1e-7, False) == "maximal"

    def test_strict(self):
        assert verdict_for(12.0, FOUR_PI, 1e-6, False) == "strict"

    def test_above_domain_volume_is_inconclusive(self):
        assert verdict_for(FOUR_PI * 1.001, FOUR_PI, 1e-6, False) == "inconclusive"

    def test_partial_is_inconclusive(self):
        assert verdict_for(FOUR_PI, FOUR_PI, 1e-6, True) == "inconclusive"


# ═══════════════════════════════════════════════════════════════════════════════
#                    NATURAL VOLUMES
# ═══════════════════════════════════════════════════════════════════════════════


class TestNaturalVolume:
    """nv of the standard cocycle, its twists and a bent boundary map."""

    def test_standard_is_maximal(self, standard_report, group_and_domain):
        _, domain = group_and_domain
        assert standard_report.verdict == "maximal"
        assert standard_report.volume == pytest.approx(domain.total_volume, rel=1e-8)
        assert standard_report.equivariance_deviation < 1e-10
        assert standard_report.map_kind == "natural"

    def test_twisted_coset_cocycle_has_same_volume(self, rng, standard_report, group_and_domain, circle_quad):
        group, domain = group_and_domain
        f = random_twist(2, 3, rng)
        sigma = twist(standard_cocycle(group, coset_space(group, (1, 0, 0, 0)), 3), f)
        phi = twist_boundary(standard_boundary_map(2, 3, 2), f)
        report = natural_volume(sigma, phi, domain, circle_quad, tol=1e-12, rng=rng, estimate_error=False)
        assert report.volume == pytest.approx(standard_report.volume, abs=1e-8)
        assert report.verdict == "maximal"

    def test_bend_is_strict(self, bend_map, circle_quad):
        _, domain = genus2_octagon(8, 4)
        report = volume(bend_map, domain)
        assert report.volume < domain.total_volume
        assert report.verdict == "strict"
        assert report.map_kind == "folded-natural"

    def test_representation_volume(self, rng, group_and_domain, circle_quad):
        group, domain = group_and_domain
        h = hyp.random_isometry(3, rng)
        images = h @ hyp.corner_inject(group.generators, 3) @ hyp.inverse_isometry(h)
        steps = standard_boundary_map(2, 3, 1).slices[0] + [IsometryStep(matrix=h)]
        report = representation_volume(group, images, steps, domain, circle_quad, tol=1e-12, estimate_error=False)
        assert report.volume == pytest.approx(domain.total_volume, rel=1e-8)
        assert report.verdict == "maximal"


# ═══════════════════════════════════════════════════════════════════════════════
#                    FOLDING
# ═══════════════════════════════════════════════════════════════════════════════


class TestFold:
    """Reduction into the Dirichlet domain and the folded extension."""

    def test_domain_points_stay(self, group_and_domain):
        group, domain = group_and_domain
        word, b = fold(group, domain.points[7])
        assert word == ()
        assert np.allclose(b, domain.points[7])

    def test_translate_folds_back(self, group_and_domain):
        group, domain = group_and_domain
        b = domain.points[11]
        a = evaluate_word(group, (1, -2, 3)) @ b
        word, folded = fold(group, a)
        assert np.allclose(folded, b, atol=1e-8)
        assert np.allclose(evaluate_word(group, word) @ folded, a, atol=1e-8)

    def test_folded_map_is_equivariant(self, rng, bend_map):
        assert map_equivariance(bend_map, 5, rng, radius=1.0, max_length=2).max_deviation < 1e-8


# ═══════════════════════════════════════════════════════════════════════════════
#                    RIGIDITY
# ═══════════════════════════════════════════════════════════════════════════════


class TestRigidity:
    """Recovering the conjugating isometries of maximal cocycles."""

    def test_standard(self, rng, standard_report, standard_evaluator):
        audit = rigidity_audit(standard_report, standard_evaluator, rng)
        assert audit.attempted
        assert not audit.inconsistent
        assert audit.max_residual < 1e-6
        recovered = hyp.inverse_isometry(np.array(audit.isometries[0]))
        assert np.allclose(recovered[:, :3], np.eye(4)[:, :3], atol=1e-6)

    def test_recovers_twist(self, rng, group_and_domain, circle_quad):
        group, domain = group_and_domain
        f = random_twist(2, 3, rng)
        sigma = twist(standard_cocycle(group, trivial_space(group, 2), 3), f)
        phi = twist_boundary(standard_boundary_map(2, 3, 2), f)
        report = natural_volume(sigma, phi, domain, circle_quad, tol=1e-12, rng=rng, estimate_error=False)
        audit = rigidity_audit(report, build_evaluator(sigma, phi, circle_quad, tol=1e-12), rng, twist=f)
        assert audit.attempted
        assert len(audit.isometries) == 2
        assert audit.twist_deviation < 1e-5

    def test_not_attempted_when_strict(self, rng, standard_evaluator):
        report = VolumeReport(
            volume=10.0,
            per_x=[10.0],
            domain_volume=FOUR_PI,
            jacobian_min=0.5,
            jacobian_mean=0.8,
            jacobian_max=1.0,
            milnor_wood_margin=FOUR_PI - 10.0,
            error_estimate=1e-4,
            verdict="strict",
        )
        audit = rigidity_audit(report, standard_evaluator, rng)
        assert not audit.attempted
        assert audit.isometries == []
