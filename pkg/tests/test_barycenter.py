"""Tests for the barycenter solver."""

from __future__ import annotations

import numpy as np
import pytest

from natmap.schemas.measure import BoundaryMeasure
from natmap.services.barycenter.solver import (
    barycenter,
    initial_guess,
    lambda_grad,
    lambda_hess,
    lambda_value,
)
from natmap.services.errors import ConvergenceError, InadmissibleMeasureError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.instances import InstanceCatalog
from natmap.services.measures.quadrature import sphere_quadrature


def _random_measure(dim: int, atoms: int, rng: np.random.Generator) -> BoundaryMeasure:
    points = np.stack([hyp.random_ideal_point(dim, rng) for _ in range(atoms)])
    return BoundaryMeasure.from_weights(points, 0.5 + rng.random(atoms))


def _circle_measure(angles, weights) -> BoundaryMeasure:
    angles = np.asarray(angles, dtype=float)
    return BoundaryMeasure.from_weights(
        hyp.ideal_point(np.stack([np.cos(angles), np.sin(angles)], axis=1)), np.asarray(weights, dtype=float)
    )


# ═══════════════════════════════════════════════════════════════════════════════
#                    SYMMETRIC MEASURES
# ═══════════════════════════════════════════════════════════════════════════════


class TestSymmetric:
    """Measures invariant under a point stabilizer have that point as barycenter."""

    def test_three_equal_atoms(self):
        nu = _circle_measure(2.0 * np.pi * np.arange(3) / 3.0, np.ones(3))
        result = barycenter(nu)
        assert np.allclose(result.point, hyp.origin(2), atol=1e-9)
        assert result.residual < 1e-10

    def test_tetrahedron(self):
        nu = InstanceCatalog().measure("tetrahedron")
        assert np.allclose(barycenter(nu).point, hyp.origin(3), atol=1e-9)

    def test_moved_symmetric_measure(self, rng):
        g = hyp.random_isometry(2, rng, 1.5)
        nu = _circle_measure(2.0 * np.pi * np.arange(4) / 4.0, np.ones(4))
        moved = BoundaryMeasure.from_weights(hyp.apply_boundary(g, nu.points), nu.weights)
        expected = hyp.apply_isometry(g, hyp.origin(2))
        assert np.allclose(barycenter(moved).point, expected, atol=1e-9)

    @pytest.mark.parametrize("radius", [4.74, 6.0])
    def test_far_from_origin(self, radius):
        quad = sphere_quadrature(2, 2048)
        a = hyp.exp_map(hyp.origin(2), radius * np.array([0.0, np.cos(0.7), np.sin(0.7)]))
        nu = BoundaryMeasure.from_weights(hyp.apply_boundary(hyp.boost(a), quad.nodes), quad.weights)
        result = barycenter(nu, tol=1e-11)
        assert result.residual < 1e-11
        assert float(hyp.distance(result.point, a)) < 1e-9


# ═══════════════════════════════════════════════════════════════════════════════
#                    OPTIMALITY
# ═══════════════════════════════════════════════════════════════════════════════


class TestOptimality:
    """The solve is the unique minimizer of Lambda_nu."""

    def test_gradient_vanishes(self, rng):
        nu = _random_measure(3, 6, rng)
        result = barycenter(nu, tol=1e-12)
        grad = lambda_grad(nu, result.point)
        assert grad.norm < 1e-11

    def test_minimizes_lambda(self, rng):
        """Sampled oracle: no nearby point has a smaller value."""
        nu = _random_measure(2, 5, rng)
        point = barycenter(nu, tol=1e-12).point
        best = lambda_value(nu, point)
        for _ in range(200):
            v = hyp.tangent_frame(point) @ rng.uniform(-0.5, 0.5, size=2)
            assert lambda_value(nu, hyp.exp_map(point, v)) >= best - 1e-12

    def test_hessian_positive_definite(self, rng):
        nu = _random_measure(3, 5, rng)
        point = barycenter(nu).point
        assert float(np.linalg.eigvalsh(lambda_hess(nu, point))[0]) > 0.0

    def test_start_independent(self, rng):
        nu = _random_measure(2, 7, rng)
        default = barycenter(nu, tol=1e-12).point
        for _ in range(3):
            start = hyp.random_point(2, rng, 2.0)
            assert np.allclose(barycenter(nu, tol=1e-12, start=start).point, default, atol=1e-8)

    def test_initial_guess_on_hyperboloid(self, rng):
        nu = _random_measure(4, 8, rng)
        guess = initial_guess(nu)
        assert float(hyp.mdot(guess, guess)) == pytest.approx(-1.0, abs=1e-12)

    def test_lambda_history_decreases(self, rng):
        result = barycenter(_random_measure(3, 6, rng))
        history = np.array(result.lambda_history)
        assert np.all(np.diff(history) <= 1e-12)


# ═══════════════════════════════════════════════════════════════════════════════
#                    EQUIVARIANCE AND FAILURES
# ═══════════════════════════════════════════════════════════════════════════════


class TestEquivariance:
    """bar(g_* nu) = g bar(nu)."""

    @pytest.mark.parametrize("dim", [2, 3, 4])
    def test_isometry_equivariance(self, rng, dim):
        for _ in range(5):
            nu = _random_measure(dim, 5, rng)
            g = hyp.random_isometry(dim, rng)
            moved = BoundaryMeasure.from_weights(hyp.apply_boundary(g, nu.points), nu.weights)
            expected = hyp.apply_isometry(g, barycenter(nu).point)
            assert np.allclose(barycenter(moved).point, expected, atol=1e-7)


class TestFailures:
    """Inadmissible measures and exhausted budgets."""

    def test_heavy_atom_rejected(self):
        nu = _circle_measure([0.0, 2.0], [1.0, 1.0])
        with pytest.raises(InadmissibleMeasureError):
            barycenter(nu)

    def test_iteration_budget(self):
        nu = InstanceCatalog().measure("three-atoms")
        with pytest.raises(ConvergenceError) as excinfo:
            barycenter(nu, max_iter=0)
        assert excinfo.value.residual > 0.0
