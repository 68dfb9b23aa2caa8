"""Covering maps between closed hyperbolic manifolds and pullbacks along them."""

from __future__ import annotations

import logging
from typing import Hashable

import numpy as np

from natmap.schemas.cocycle import Cocycle
from natmap.schemas.degree import CoveringMap
from natmap.schemas.lattice import FundamentalDomain, GroupPresentation
from natmap.services.cocycles.cocycle import check_cocycle_relators, evaluate
from natmap.services.cocycles.space import word_orbit
from natmap.services.errors import RelatorError
from natmap.services.lattice.covers import cover_domain
from natmap.services.lattice.groups import RELATOR_TOL, evaluate_word, letter_matrix, product_tolerance
from natmap.services.volume.maps import EquivariantMapSpec, SliceValues

logger = logging.getLogger(__name__)

VOLUME_TOL = 2e-3


def identity_covering(group: GroupPresentation, domain: FundamentalDomain) -> CoveringMap:
    return CoveringMap(
        source=group,
        source_domain=domain,
        target=group,
        target_domain=domain,
        inclusion=[(index,) for index in range(1, group.rank + 1)],
        degree=1,
        label=f"{group.label}-identity",
    )


def covering_from_cover(
    parent: GroupPresentation, parent_domain: FundamentalDomain, cover: GroupPresentation
) -> CoveringMap:
    """The covering Gamma \\ H -> Lambda \\ H of a finite-index subgroup built by index2_cover."""
    if cover.parent_words is None or cover.transversal is None:
        return identity_covering(parent, parent_domain)
    return check_covering(
        CoveringMap(
            source=cover,
            source_domain=cover_domain(parent_domain, parent, cover),
            target=parent,
            target_domain=parent_domain,
            inclusion=cover.parent_words,
            degree=len(cover.transversal),
            label=f"{cover.label}->{parent.label}",
        )
    )


def check_covering(f: CoveringMap) -> CoveringMap:
    """Generators must be the images of their inclusion words; volumes must scale by the degree.

    Raises:
        RelatorError: If an inclusion word does not evaluate to its generator.
    """
    for index, word in enumerate(f.inclusion):
        image = evaluate_word(f.target, word)
        scale = max(1.0, float(np.max(np.abs(image))))
        defect = float(np.max(np.abs(image - f.source.generators[index]))) / scale
        if defect > RELATOR_TOL:
            raise RelatorError(f"Generator {index + 1} of {f.source.label} is not the image of {word}")
    identity = np.eye(f.target.dim + 1)
    for relator in f.source.relators:
        word = tuple(l for letter in relator for l in _image(f, letter))
        tol = product_tolerance([letter_matrix(f.target, l) for l in word])
        if float(np.max(np.abs(evaluate_word(f.target, word) - identity))) > tol:
            raise RelatorError(f"Relator {relator} does not map to the identity")
    expected = f.degree * f.target_domain.total_volume
    if abs(f.source_domain.total_volume - expected) > VOLUME_TOL:
        logger.warning(
            f"Covering volumes disagree: {f.source_domain.total_volume:.6f} vs {expected:.6f}"
        )
    return f


def _image(f: CoveringMap, letter: int):
    word = f.inclusion[abs(letter) - 1]
    return word if letter > 0 else tuple(-l for l in reversed(word))


def pullback_cocycle(f: CoveringMap, sigma: Cocycle) -> Cocycle:
    """f*sigma(gamma, x) = sigma(pi_1(f)(gamma), x), X seen as a Gamma-space through pi_1(f)."""
    if sigma.group.rank != f.target.rank:
        raise RelatorError("Cocycle is not defined over the target group of the covering")
    space = word_orbit(sigma.space, f.inclusion)
    values = np.stack(
        [[evaluate(sigma, word, x) for x in range(space.size)] for word in f.inclusion]
    ) if f.inclusion else np.zeros((0, space.size, sigma.target_dim + 1, sigma.target_dim + 1))
    pulled = Cocycle(group=f.source, space=space, target_dim=sigma.target_dim, values=values)
    return check_cocycle_relators(pulled)


class PulledBackMapSpec(EquivariantMapSpec):
    """f*Phi(a, x) = Phi(F(a), x) with F the identity lift of a covering."""

    def __init__(self, f: CoveringMap, phi: EquivariantMapSpec):
        super().__init__(pullback_cocycle(f, phi.cocycle))
        self.covering = f
        self.phi = phi
        self.kind = f"pullback-{phi.kind}"

    def point(self, a: np.ndarray, x: int) -> np.ndarray:
        return self.phi.point(a, x)

    def slice_values(self, a: np.ndarray, x: int) -> SliceValues:
        return self.phi.slice_values(a, x)

    def slice_key(self, x: int) -> Hashable:
        return self.phi.slice_key(x)

    def cell_values(self, a: np.ndarray) -> np.ndarray:
        return self.phi.cell_values(a)


def pullback_map(f: CoveringMap, phi: EquivariantMapSpec) -> PulledBackMapSpec:
    return PulledBackMapSpec(f, phi)
