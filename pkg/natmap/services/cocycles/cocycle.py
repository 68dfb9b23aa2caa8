"""Measurable cocycles over finite spaces: representations, twists and identity checks."""

from __future__ import annotations

import logging
from typing import List, Sequence, Tuple

import numpy as np

from natmap.schemas.cocycle import Cocycle, FiniteProbSpace
from natmap.schemas.lattice import GroupPresentation, Word
from natmap.services.errors import DimensionError, RelatorError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.lattice.groups import RELATOR_TOL, product_tolerance
from natmap.services.cocycles.space import act_word

logger = logging.getLogger(__name__)


def generator_value(sigma: Cocycle, letter: int, x: int) -> np.ndarray:
    """sigma(g, x), or sigma(g^-1, x) = sigma(g, g^-1 x)^-1 for a negative letter."""
    if letter > 0:
        return sigma.values[letter - 1, x]
    moved = sigma.space.act(letter, x)
    return hyp.inverse_isometry(sigma.values[-letter - 1, moved])


def word_values(sigma: Cocycle, word: Sequence[int], x: int) -> List[np.ndarray]:
    """Factors of sigma(gamma, x), left to right, as produced by the cocycle identity."""
    factors: List[np.ndarray] = []
    for letter in reversed(word):
        factors.append(generator_value(sigma, letter, x))
        x = sigma.space.act(letter, x)
    return factors[::-1]


def evaluate(sigma: Cocycle, word: Sequence[int], x: int) -> np.ndarray:
    """sigma(gamma, x) through sigma(g1 g2, x) = sigma(g1, g2 x) sigma(g2, x)."""
    result = np.eye(sigma.target_dim + 1)
    for factor in reversed(word_values(sigma, word, x)):
        result = factor @ result
    return result


def rep_cocycle(
    group: GroupPresentation, images: np.ndarray, space: FiniteProbSpace
) -> Cocycle:
    """sigma_rho(g, x) = rho(g), rho given by the generator images.

    Raises:
        RelatorError: If some relator of the group is not trivial under rho.
    """
    images = np.asarray(images, dtype=float)
    if images.shape[0] != group.rank:
        raise DimensionError(f"Representation needs {group.rank} generator images")
    m = images.shape[-1] - 1 if images.size else group.dim
    identity = np.eye(m + 1)
    for relator in group.relators:
        factors = [
            images[abs(letter) - 1] if letter > 0 else hyp.inverse_isometry(images[abs(letter) - 1])
            for letter in relator
        ]
        product = np.eye(m + 1)
        for factor in factors:
            product = product @ factor
        defect = float(np.max(np.abs(product - identity)))
        if defect > product_tolerance(factors):
            raise RelatorError(f"Representation violates relator {relator} (defect {defect:.3e})")
    values = np.broadcast_to(images[:, None], (group.rank, space.size, m + 1, m + 1)).copy()
    return Cocycle(group=group, space=space, target_dim=m, values=values)


def standard_cocycle(group: GroupPresentation, space: FiniteProbSpace, m: int) -> Cocycle:
    """Cocycle of the lattice embedding composed with the corner injection into O(m, 1)."""
    if not group.rank:
        values = np.zeros((0, space.size, m + 1, m + 1))
        return Cocycle(group=group, space=space, target_dim=m, values=values)
    return rep_cocycle(group, hyp.corner_inject(group.generators, m), space)


def twist(sigma: Cocycle, f: np.ndarray) -> Cocycle:
    """sigma^f(g, x) = f(gx)^-1 sigma(g, x) f(x) for f given as one isometry per point."""
    f = np.asarray(f, dtype=float)
    if f.shape != (sigma.space.size, sigma.target_dim + 1, sigma.target_dim + 1):
        raise DimensionError(f"Twist must give one isometry of H^{sigma.target_dim} per point")
    f_inv = hyp.inverse_isometry(f)
    values = np.empty_like(sigma.values)
    for g in range(sigma.group.rank):
        moved = sigma.space.actions[g]
        values[g] = f_inv[moved] @ sigma.values[g] @ f
    return Cocycle(group=sigma.group, space=sigma.space, target_dim=sigma.target_dim, values=values)


def random_twist(
    size: int, m: int, rng: np.random.Generator, radius: float = 1.0
) -> np.ndarray:
    return np.stack([hyp.random_isometry(m, rng, radius) for _ in range(size)])


def constant_twist(size: int, h: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(h, dtype=float), (size,) + np.shape(h)).copy()


def cocycle_identity_defect(
    sigma: Cocycle, pairs: Sequence[Tuple[Word, Word]]
) -> float:
    """Max deviation of sigma(w1 w2, x) from sigma(w1, w2 x) sigma(w2, x) over pairs and x."""
    worst = 0.0
    for first, second in pairs:
        for x in range(sigma.space.size):
            joint = evaluate(sigma, tuple(first) + tuple(second), x)
            split = evaluate(sigma, first, act_word(sigma.space, second, x)) @ evaluate(sigma, second, x)
            scale = max(1.0, float(np.max(np.abs(joint))))
            worst = max(worst, float(np.max(np.abs(joint - split))) / scale)
    return worst


def check_cocycle_relators(sigma: Cocycle, tol: float = RELATOR_TOL) -> Cocycle:
    """Every relator must evaluate to the identity at every point."""
    identity = np.eye(sigma.target_dim + 1)
    for relator in sigma.group.relators:
        for x in range(sigma.space.size):
            factors = word_values(sigma, relator, x)
            product = np.eye(sigma.target_dim + 1)
            for factor in reversed(factors):
                product = factor @ product
            defect = float(np.max(np.abs(product - identity)))
            if defect > product_tolerance(factors, tol):
                raise RelatorError(f"Cocycle is not trivial on relator {relator} at x={x} ({defect:.3e})")
    return sigma


def random_word(rank: int, rng: np.random.Generator, max_length: int = 4) -> Word:
    if rank == 0:
        return ()
    length = int(rng.integers(1, max_length + 1))
    letters = rng.integers(1, rank + 1, size=length) * rng.choice([-1, 1], size=length)
    return tuple(int(l) for l in letters)
