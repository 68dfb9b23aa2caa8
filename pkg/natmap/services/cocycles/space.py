"""Finite probability Gamma-spaces."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from natmap.schemas.cocycle import FiniteProbSpace
from natmap.schemas.lattice import GroupPresentation, Word
from natmap.services.errors import DimensionError, RelatorError

DEFAULT_SPACE_SIZE = 16


def act_word(space: FiniteProbSpace, word: Sequence[int], x: int) -> int:
    """gamma . x for gamma = g_{w1} ... g_{wk}; the last letter acts first."""
    for letter in reversed(word):
        x = space.act(letter, x)
    return x


def check_space_relators(space: FiniteProbSpace, group: GroupPresentation) -> FiniteProbSpace:
    for relator in group.relators:
        for x in range(space.size):
            if act_word(space, relator, x) != x:
                raise RelatorError(f"Relator {relator} moves point {x} of the space")
    return space


def permutation_space(
    group: GroupPresentation,
    permutations: Sequence[Sequence[int]],
    weights: Optional[Sequence[float]] = None,
) -> FiniteProbSpace:
    """Space given by a homomorphism from the group to a symmetric group."""
    permutations = np.asarray(permutations, dtype=int)
    if permutations.shape[0] != group.rank:
        raise DimensionError(f"Need {group.rank} permutations, got {permutations.shape[0]}")
    size = permutations.shape[1]
    weights = np.full(size, 1.0 / size) if weights is None else np.asarray(weights, dtype=float)
    space = FiniteProbSpace(weights=weights, actions=permutations)
    return check_space_relators(space, group)


def trivial_space(group: GroupPresentation, size: int = DEFAULT_SPACE_SIZE) -> FiniteProbSpace:
    """Uniform space on size points with every generator acting trivially."""
    if size < 1:
        raise DimensionError(f"Space needs at least one point, got {size}")
    actions = np.tile(np.arange(size), (group.rank, 1)) if group.rank else np.zeros((0, size), dtype=int)
    return FiniteProbSpace(weights=np.full(size, 1.0 / size), actions=actions)


def coset_space(group: GroupPresentation, parity: Sequence[int]) -> FiniteProbSpace:
    """The two cosets of the kernel of a parity map, generators of parity 1 swapping them."""
    swap = np.array([1, 0])
    actions = [swap if int(p) % 2 else np.arange(2) for p in parity]
    return permutation_space(group, actions)


def word_orbit(space: FiniteProbSpace, words: Sequence[Word]) -> FiniteProbSpace:
    """Space seen through a homomorphism given on generators by words (pullback action)."""
    actions = np.array(
        [[act_word(space, word, x) for x in range(space.size)] for word in words], dtype=int
    )
    if not len(words):
        actions = np.zeros((0, space.size), dtype=int)
    return FiniteProbSpace(weights=space.weights, actions=actions)
