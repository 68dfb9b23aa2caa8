"""Tests for probability spaces, cocycles, twists and boundary maps."""

from __future__ import annotations

import numpy as np
import pytest

from natmap.schemas.cocycle import BendStep, BoundaryMapSpec, EmbedStep, IsometryStep, SquashStep
from natmap.services.cocycles.boundary_map import (
    apply_slice,
    check_equivariance,
    check_injective,
    slice_key,
    slice_separation,
    standard_boundary_map,
    target_dim,
    twist_boundary,
)
from natmap.services.cocycles.cocycle import (
    check_cocycle_relators,
    cocycle_identity_defect,
    constant_twist,
    evaluate,
    random_twist,
    random_word,
    rep_cocycle,
    standard_cocycle,
    twist,
)
from natmap.services.cocycles.space import (
    act_word,
    coset_space,
    permutation_space,
    trivial_space,
    word_orbit,
)
from natmap.services.errors import DimensionError, InadmissibleMeasureError, RelatorError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.lattice.groups import evaluate_word


@pytest.fixture
def group(coarse_genus2):
    return coarse_genus2[0]


def _pairs(rng, count=20):
    return [(random_word(4, rng), random_word(4, rng)) for _ in range(count)]


# ═══════════════════════════════════════════════════════════════════════════════
#                    PROBABILITY SPACES
# ═══════════════════════════════════════════════════════════════════════════════


class TestSpaces:
    """Finite Gamma-spaces and their actions."""

    def test_trivial_space(self, group):
        space = trivial_space(group, 4)
        assert space.size == 4
        assert act_word(space, (1, -2, 3), 2) == 2

    def test_coset_space_swaps_on_odd_letters(self, group):
        space = coset_space(group, (1, 0, 0, 0))
        assert act_word(space, (1,), 0) == 1
        assert act_word(space, (2, 3), 0) == 0
        assert act_word(space, (1, 1), 1) == 1

    def test_inverse_letters_undo(self, rng, group):
        space = coset_space(group, (1, 1, 0, 0))
        for _ in range(10):
            word = random_word(4, rng)
            x = int(rng.integers(2))
            assert act_word(space, tuple(-l for l in reversed(word)), act_word(space, word, x)) == x

    def test_relators_checked(self, group):
        three_cycle = [1, 2, 0]
        swap = [1, 0, 2]
        identity = [0, 1, 2]
        with pytest.raises(RelatorError):
            permutation_space(group, [three_cycle, swap, identity, identity])

    def test_permutation_count_checked(self, group):
        with pytest.raises(DimensionError):
            permutation_space(group, [[0, 1]])

    def test_word_orbit(self, group):
        space = coset_space(group, (1, 0, 0, 0))
        pulled = word_orbit(space, [(1, 1), (1,), (2,), (3,)])
        assert list(pulled.actions[0]) == [0, 1]
        assert list(pulled.actions[1]) == [1, 0]


# ═══════════════════════════════════════════════════════════════════════════════
#                    COCYCLES
# ═══════════════════════════════════════════════════════════════════════════════


class TestCocycle:
    """Cocycle identity, representations and twists."""

    def test_standard_cocycle_is_corner_injection(self, rng, group):
        sigma = standard_cocycle(group, trivial_space(group, 2), 3)
        for _ in range(5):
            word = random_word(4, rng)
            expected = hyp.corner_inject(evaluate_word(group, word), 3)
            assert np.allclose(evaluate(sigma, word, 1), expected, atol=1e-9)

    def test_cocycle_identity(self, rng, group):
        sigma = standard_cocycle(group, coset_space(group, (1, 0, 1, 0)), 4)
        twisted = twist(sigma, random_twist(2, 4, rng))
        assert cocycle_identity_defect(twisted, _pairs(rng)) < 1e-9

    def test_twisted_relators(self, rng, group):
        sigma = standard_cocycle(group, coset_space(group, (1, 0, 0, 0)), 3)
        check_cocycle_relators(twist(sigma, random_twist(2, 3, rng)))

    def test_twist_back(self, rng, group):
        sigma = standard_cocycle(group, coset_space(group, (1, 0, 0, 0)), 3)
        f = random_twist(2, 3, rng)
        back = twist(twist(sigma, f), hyp.inverse_isometry(f))
        assert np.allclose(back.values, sigma.values, atol=1e-9)

    def test_twist_formula(self, rng, group):
        space = coset_space(group, (1, 0, 0, 0))
        sigma = standard_cocycle(group, space, 3)
        f = random_twist(2, 3, rng)
        twisted = twist(sigma, f)
        word = (1, 2)
        for x in range(2):
            gx = act_word(space, word, x)
            expected = hyp.inverse_isometry(f[gx]) @ evaluate(sigma, word, x) @ f[x]
            assert np.allclose(evaluate(twisted, word, x), expected, atol=1e-9)

    def test_constant_twist_of_trivial_space_conjugates(self, rng, group):
        h = hyp.random_isometry(3, rng)
        sigma = standard_cocycle(group, trivial_space(group, 3), 3)
        twisted = twist(sigma, constant_twist(3, h))
        expected = hyp.inverse_isometry(h) @ sigma.values[0, 0] @ h
        assert np.allclose(twisted.values[0, 2], expected, atol=1e-9)

    def test_twist_shape_checked(self, rng, group):
        sigma = standard_cocycle(group, trivial_space(group, 2), 3)
        with pytest.raises(DimensionError):
            twist(sigma, random_twist(3, 3, rng))

    def test_representation_relators_checked(self, group):
        images = hyp.corner_inject(group.generators, 3)
        images[0] = hyp.axis_boost(3, 0.3)
        with pytest.raises(RelatorError):
            rep_cocycle(group, images, trivial_space(group, 1))

    def test_random_word(self, rng):
        for _ in range(20):
            word = random_word(4, rng, max_length=3)
            assert 1 <= len(word) <= 3
            assert all(1 <= abs(l) <= 4 for l in word)
        assert random_word(0, rng) == ()


# ═══════════════════════════════════════════════════════════════════════════════
#                    BOUNDARY MAPS
# ═══════════════════════════════════════════════════════════════════════════════


class TestBoundaryMap:
    """Slice chains, equivariance scans and injectivity."""

    def test_standard_map_embeds_equator(self, rng):
        phi = standard_boundary_map(2, 4, 1)
        assert target_dim(phi) == 4
        xi = hyp.random_ideal_point(2, rng)
        assert np.allclose(apply_slice(phi.slices[0], xi), hyp.geodesic_embed(xi, 4))

    def test_standard_map_equivariant(self, rng, group):
        sigma = standard_cocycle(group, trivial_space(group, 2), 3)
        report = check_equivariance(sigma, standard_boundary_map(2, 3, 2), 20, rng)
        assert report.max_deviation < 1e-10

    def test_twisted_pair_equivariant(self, rng, group):
        sigma = standard_cocycle(group, coset_space(group, (0, 1, 0, 0)), 3)
        f = random_twist(2, 3, rng)
        report = check_equivariance(
            twist(sigma, f), twist_boundary(standard_boundary_map(2, 3, 2), f), 20, rng
        )
        assert report.max_deviation < 1e-9

    def test_twist_boundary_appends_inverse(self, rng):
        f = random_twist(1, 3, rng)
        phi = twist_boundary(standard_boundary_map(2, 3, 1), f)
        xi = hyp.random_ideal_point(2, rng)
        expected = hyp.apply_boundary(hyp.inverse_isometry(f[0]), hyp.geodesic_embed(xi, 3))
        assert np.allclose(apply_slice(phi.slices[0], xi), expected, atol=1e-12)

    def test_twist_boundary_count_checked(self, rng):
        with pytest.raises(DimensionError):
            twist_boundary(standard_boundary_map(2, 3, 2), random_twist(3, 3, rng))

    def test_bend_breaks_equivariance(self, rng, group):
        sigma = standard_cocycle(group, trivial_space(group, 1), 3)
        phi = standard_boundary_map(2, 3, 1, [BendStep(amplitude=0.3, frequency=2)])
        assert check_equivariance(sigma, phi, 20, rng).max_deviation > 1e-3

    def test_bend_without_amplitude_is_identity(self, rng):
        xi = np.stack([hyp.random_ideal_point(3, rng) for _ in range(10)])
        assert np.allclose(apply_slice([BendStep(amplitude=0.0, frequency=2)], xi), xi, atol=1e-12)

    def test_bend_needs_a_two_sphere(self, rng):
        with pytest.raises(DimensionError):
            apply_slice([BendStep(amplitude=0.3, frequency=2)], hyp.random_ideal_point(2, rng))

    def test_squash_fixes_center(self, rng):
        step = SquashStep(center=[1.0, 0.0, 0.0], kappa=2.0)
        center = np.array([1.0, 1.0, 0.0, 0.0])
        assert np.allclose(apply_slice([step], center), center, atol=1e-12)
        xi = np.stack([hyp.random_ideal_point(3, rng) for _ in range(5)])
        assert np.allclose(apply_slice([SquashStep(center=[0.0, 0.0, 1.0], kappa=1.0)], xi), xi, atol=1e-10)

    def test_squash_center_dimension_checked(self, rng):
        with pytest.raises(DimensionError):
            apply_slice([SquashStep(center=[1.0, 0.0], kappa=2.0)], hyp.random_ideal_point(3, rng))

    def test_isometry_step_dimension_checked(self, rng):
        with pytest.raises(DimensionError):
            target_dim(BoundaryMapSpec(source_dim=2, slices=[[IsometryStep(matrix=np.eye(4))]]))

    def test_embed_cannot_shrink(self):
        with pytest.raises(DimensionError):
            target_dim(BoundaryMapSpec(source_dim=3, slices=[[EmbedStep(target_dim=2)]]))

    def test_injectivity(self, circle_quad):
        phi = standard_boundary_map(2, 3, 1)
        assert check_injective(phi, circle_quad.nodes) == pytest.approx(
            slice_separation(phi.slices[0], circle_quad.nodes)
        )
        collapsing = BoundaryMapSpec(
            source_dim=3, slices=[[SquashStep(center=[1.0, 0.0, 0.0], kappa=50.0)]]
        )
        nodes = np.stack([hyp.random_ideal_point(3, np.random.default_rng(1)) for _ in range(200)])
        with pytest.raises(InadmissibleMeasureError):
            check_injective(collapsing, nodes)

    def test_slice_keys(self, rng):
        f = random_twist(2, 3, rng)
        phi = twist_boundary(standard_boundary_map(2, 3, 2), f)
        plain = standard_boundary_map(2, 3, 2)
        assert slice_key(plain.slices[0]) == slice_key(plain.slices[1])
        assert slice_key(phi.slices[0]) != slice_key(phi.slices[1])
