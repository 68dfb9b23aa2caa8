"""Tests for natural-map evaluation, its differential and the Jacobian bound audit."""

from __future__ import annotations

import numpy as np
import pytest

from natmap.schemas.cocycle import BendStep
from natmap.services.cocycles.boundary_map import standard_boundary_map, twist_boundary
from natmap.services.cocycles.cocycle import random_twist, standard_cocycle, twist
from natmap.services.cocycles.space import trivial_space
from natmap.services.errors import DimensionError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.instances import InstanceCatalog
from natmap.services.measures.quadrature import sphere_quadrature
from natmap.services.natural_map.audit import (
    bcg_bound_audit,
    cauchy_schwarz_gap,
    check_natural_equivariance,
)
from natmap.services.natural_map.evaluator import (
    build_evaluator,
    differential,
    implicit_residual,
    is_isometric,
    jacobian,
    natural_point,
)


@pytest.fixture(scope="module")
def bend_evaluator(coarse_genus2, circle_quad):
    group, _ = coarse_genus2
    sigma = standard_cocycle(group, trivial_space(group, 1), 3)
    phi = standard_boundary_map(2, 3, 1, [BendStep(amplitude=0.3, frequency=2)])
    return build_evaluator(sigma, phi, circle_quad, tol=1e-12)


def _frame_difference(base: np.ndarray, plus: np.ndarray, minus: np.ndarray, h: float) -> np.ndarray:
    frame = hyp.tangent_frame(base)
    step = hyp.log_map(base, plus) - hyp.log_map(base, minus)
    return hyp.frame_coordinates(frame, step) / (2.0 * h)


# ═══════════════════════════════════════════════════════════════════════════════
#                    STANDARD EMBEDDING
# ═══════════════════════════════════════════════════════════════════════════════


class TestStandardEmbedding:
    """The lattice embedding H^2 -> H^3 is its own natural map."""

    def test_natural_point_is_embedded_point(self, rng, standard_evaluator):
        for _ in range(5):
            a = hyp.random_point(2, rng, 1.0)
            assert np.allclose(natural_point(standard_evaluator, a, 0), hyp.geodesic_embed(a, 3), atol=1e-9)

    def test_differential_is_inclusion(self, rng, standard_evaluator):
        a = hyp.random_point(2, rng, 1.0)
        diff = differential(standard_evaluator, a, 0)
        assert np.allclose(diff.matrix, np.vstack([np.eye(2), np.zeros((1, 2))]), atol=1e-8)
        assert jacobian(diff) == pytest.approx(1.0, abs=1e-8)
        assert is_isometric(diff)

    def test_audit_is_tight(self, standard_evaluator):
        diff = differential(standard_evaluator, hyp.origin(2), 0)
        audit = bcg_bound_audit(diff)
        assert audit.holds
        assert audit.chain_margin == pytest.approx(0.0, abs=1e-8)
        assert audit.cs_operator_ratio == pytest.approx(1.0, abs=1e-8)
        assert not audit.b1_applicable
        assert audit.b1_margin is None

    def test_implicit_residual(self, rng, standard_evaluator):
        a = hyp.random_point(2, rng, 1.0)
        point = natural_point(standard_evaluator, a, 0)
        assert implicit_residual(standard_evaluator, a, 0, point) < 1e-10
        off = hyp.apply_isometry(hyp.axis_boost(3, 0.2, axis=3), point)
        assert implicit_residual(standard_evaluator, a, 0, off) > 1e-3

    def test_jacobian_order_checked(self, standard_evaluator):
        diff = differential(standard_evaluator, hyp.origin(2), 0)
        with pytest.raises(DimensionError):
            jacobian(diff, 3)
        with pytest.raises(DimensionError):
            jacobian(diff, 0)

    def test_slice_index_checked(self, standard_evaluator):
        with pytest.raises(DimensionError):
            natural_point(standard_evaluator, hyp.origin(2), 1)

    def test_equivariance(self, rng, coarse_genus2):
        group, _ = coarse_genus2
        sigma = standard_cocycle(group, trivial_space(group, 1), 3)
        ev = build_evaluator(sigma, standard_boundary_map(2, 3, 1), sphere_quadrature(2, 1024), tol=1e-12)
        report = check_natural_equivariance(ev, 6, rng, radius=0.5, max_length=1)
        assert report.max_deviation < 1e-7


# ═══════════════════════════════════════════════════════════════════════════════
#                    TWISTS AND BENDS
# ═══════════════════════════════════════════════════════════════════════════════


class TestDeformations:
    """Twisted slices move F by the twist; bent slices stay within the bound."""

    def test_twisted_point(self, rng, coarse_genus2, circle_quad):
        group, _ = coarse_genus2
        f = random_twist(1, 3, rng)
        sigma = twist(standard_cocycle(group, trivial_space(group, 1), 3), f)
        ev = build_evaluator(sigma, twist_boundary(standard_boundary_map(2, 3, 1), f), circle_quad, tol=1e-12)
        a = hyp.random_point(2, rng, 1.0)
        expected = hyp.apply_isometry(hyp.inverse_isometry(f[0]), hyp.geodesic_embed(a, 3))
        assert np.allclose(natural_point(ev, a, 0), expected, atol=1e-8)

    def test_differential_matches_finite_differences(self, rng, bend_evaluator):
        h = 1e-4
        a = hyp.random_point(2, rng, 1.0)
        diff = differential(bend_evaluator, a, 0)
        frame = hyp.tangent_frame(a)
        for i in range(2):
            plus = natural_point(bend_evaluator, hyp.exp_map(a, h * frame[:, i]), 0)
            minus = natural_point(bend_evaluator, hyp.exp_map(a, -h * frame[:, i]), 0)
            column = _frame_difference(diff.point, plus, minus, h)
            assert np.allclose(column, diff.matrix[:, i], atol=1e-5)

    def test_bend_contracts(self, rng, bend_evaluator):
        for _ in range(3):
            diff = differential(bend_evaluator, hyp.random_point(2, rng, 1.0), 0)
            audit = bcg_bound_audit(diff)
            assert audit.holds
            assert audit.jacobian <= audit.chain_bound + 1e-9

    def test_cauchy_schwarz_gap(self, rng, bend_evaluator):
        diff = differential(bend_evaluator, hyp.random_point(2, rng, 1.0), 0)
        u = rng.standard_normal((50, 2))
        v = rng.standard_normal((50, 3))
        assert float(np.min(cauchy_schwarz_gap(diff, u, v))) >= -1e-9
        with pytest.raises(DimensionError):
            cauchy_schwarz_gap(diff, v, v)

    def test_squash_in_dimension_three(self, rng, sphere_quad):
        instance, domain = InstanceCatalog().cocycle("squash-h3")
        assert domain is None
        ev = build_evaluator(instance.cocycle, instance.boundary, sphere_quad, tol=1e-12)
        for _ in range(3):
            diff = differential(ev, hyp.random_point(3, rng, 0.8), 0)
            audit = bcg_bound_audit(diff)
            assert audit.b1_applicable
            assert audit.holds
            assert jacobian(diff) <= 1.0 + 2e-4
