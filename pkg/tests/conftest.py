"""Shared fixtures: seeded randomness, the genus-2 lattice at test resolution, small quadratures."""

from __future__ import annotations

import numpy as np
import pytest

from natmap.services.cocycles.boundary_map import standard_boundary_map
from natmap.services.cocycles.cocycle import standard_cocycle
from natmap.services.cocycles.space import trivial_space
from natmap.services.lattice.octagon import genus2_octagon
from natmap.services.measures.quadrature import sphere_quadrature
from natmap.services.natural_map.evaluator import build_evaluator


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def genus2():
    """Genus-2 group with its octagon at the resolution used for area checks."""
    return genus2_octagon(10, 5)


@pytest.fixture(scope="session")
def coarse_genus2():
    """Genus-2 group with a 16 x 4 x 2 cell octagon, for volume runs."""
    return genus2_octagon(4, 2)


@pytest.fixture(scope="session")
def circle_quad():
    return sphere_quadrature(2, 256)


@pytest.fixture(scope="session")
def sphere_quad():
    return sphere_quadrature(3, 800)


@pytest.fixture(scope="session")
def standard_evaluator(coarse_genus2, circle_quad):
    """Natural map of the lattice embedding H^2 -> H^3 over a one-point space."""
    group, _ = coarse_genus2
    sigma = standard_cocycle(group, trivial_space(group, 1), 3)
    return build_evaluator(sigma, standard_boundary_map(2, 3, 1), circle_quad, tol=1e-12)
