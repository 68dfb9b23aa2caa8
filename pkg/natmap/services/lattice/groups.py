"""Word arithmetic and orbit enumeration for finitely generated isometry groups."""

from __future__ import annotations

import logging
from typing import Iterable, List, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from natmap.schemas.lattice import GroupPresentation, OrbitBall, Word
from natmap.services.errors import DimensionError, RelatorError, ResourceError
from natmap.services.geometry import hyperboloid as hyp

logger = logging.getLogger(__name__)

RELATOR_TOL = 1e-8
RELATOR_RTOL = 1e-12
DEDUP_TOL = 1e-8
ORBIT_BUDGET = 10**7
CHUNK = 50_000
_TREE_RADIUS = 0.5


def trivial_group(dim: int, label: str = "trivial") -> GroupPresentation:
    return GroupPresentation(dim=dim, generators=np.zeros((0, dim + 1, dim + 1)), label=label)


def alphabet(rank: int) -> List[int]:
    """Letters in shortlex order: g1, g1^-1, g2, g2^-1, ..."""
    letters: List[int] = []
    for index in range(1, rank + 1):
        letters.extend([index, -index])
    return letters


def inverse_word(word: Sequence[int]) -> Word:
    return tuple(-letter for letter in reversed(word))


def reduce_word(word: Iterable[int]) -> Word:
    """Free reduction of a word."""
    stack: List[int] = []
    for letter in word:
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def letter_matrix(group: GroupPresentation, letter: int) -> np.ndarray:
    if letter == 0 or abs(letter) > group.rank:
        raise DimensionError(f"Letter {letter} is not a generator index of {group.label}")
    matrix = group.generators[abs(letter) - 1]
    return matrix if letter > 0 else hyp.inverse_isometry(matrix)


def evaluate_word(group: GroupPresentation, word: Sequence[int]) -> np.ndarray:
    """Matrix of g_{w1} g_{w2} ... g_{wk}."""
    result = np.eye(group.dim + 1)
    for letter in word:
        result = result @ letter_matrix(group, letter)
    return result


def product_scale(matrices: Sequence[np.ndarray]) -> float:
    """Largest |M_1 ... M_{i-1}| |M_i| |M_{i+1} ... M_k| over i, in Frobenius norm.

    Rounding in the product M_1 ... M_k is bounded by a small multiple of eps times this.
    """
    if not len(matrices):
        return 1.0
    dim = matrices[0].shape[-1]
    prefixes = [np.eye(dim)]
    for matrix in matrices[:-1]:
        prefixes.append(prefixes[-1] @ matrix)
    suffixes = [np.eye(dim)]
    for matrix in reversed(matrices[1:]):
        suffixes.append(matrix @ suffixes[-1])
    suffixes.reverse()
    bound = max(
        np.linalg.norm(prefix) * np.linalg.norm(matrix) * np.linalg.norm(suffix)
        for prefix, matrix, suffix in zip(prefixes, matrices, suffixes)
    )
    return float(bound)


def product_tolerance(matrices: Sequence[np.ndarray], tol: float = RELATOR_TOL) -> float:
    """Tolerance for comparing a product of isometries with the identity."""
    return max(tol, RELATOR_RTOL * product_scale(matrices))


def word_scale(group: GroupPresentation, word: Sequence[int]) -> float:
    return product_scale([letter_matrix(group, letter) for letter in word])


def relator_defects(group: GroupPresentation) -> List[float]:
    """Max-entry deviation of each relator from the identity, relative to its rounding scale."""
    identity = np.eye(group.dim + 1)
    return [
        float(np.max(np.abs(evaluate_word(group, r) - identity))) / max(1.0, word_scale(group, r))
        for r in group.relators
    ]


def check_relators(group: GroupPresentation, tol: float = RELATOR_TOL) -> GroupPresentation:
    identity = np.eye(group.dim + 1)
    for relator in group.relators:
        defect = float(np.max(np.abs(evaluate_word(group, relator) - identity)))
        if defect > max(tol, RELATOR_RTOL * word_scale(group, relator)):
            raise RelatorError(f"Relator {relator} of {group.label} has defect {defect:.3e}")
    return group


def _default_slack(group: GroupPresentation, base: np.ndarray) -> float:
    if group.covering_radius is not None:
        # covering radius is measured from o
        return float(group.covering_radius) + 2.0 * float(hyp.distance(group.base, base))
    if group.rank == 0:
        return 0.0
    moved = hyp.apply_isometry(group.generators, base)
    return float(np.max(hyp.distance(base, moved)))


def orbit_ball(
    group: GroupPresentation,
    radius: float,
    base: Optional[np.ndarray] = None,
    budget: int = ORBIT_BUDGET,
    slack: Optional[float] = None,
) -> OrbitBall:
    """All orbit points gamma.base with d(base, gamma.base) <= radius.

    Breadth-first over right multiplication gamma -> gamma g, one layer per word
    length, candidates generated in shortlex order so the first word reaching a
    point is kept. The frontier extends to radius + slack, slack being the
    covering radius of the fundamental domain.

    Raises:
        ResourceError: If more than budget words are generated.
    """
    if radius < 0:
        raise ValueError(f"Orbit radius must be non-negative, got {radius}")
    base = hyp.origin(group.dim) if base is None else hyp.check_point(base)
    limit = radius + (_default_slack(group, base) if slack is None else slack)
    letters = alphabet(group.rank)
    letter_mats = np.stack([letter_matrix(group, l) for l in letters]) if letters else None

    points: List[np.ndarray] = [base[None, :]]
    parents: List[np.ndarray] = [np.array([-1])]
    last_letters: List[np.ndarray] = [np.array([0])]
    trees: List[cKDTree] = [cKDTree(base[None, :])]
    offsets = [0]
    frontier_mats = np.eye(group.dim + 1)[None]
    frontier_last = np.array([0])
    frontier_offset = 0
    explored = 1

    while frontier_mats.shape[0] and letter_mats is not None:
        layer_points, layer_parent, layer_letter, layer_mats = [], [], [], []
        for start in range(0, frontier_mats.shape[0], CHUNK):
            mats = frontier_mats[start : start + CHUNK]
            last = frontier_last[start : start + CHUNK]
            cand = np.einsum("fij,ljk->flik", mats, letter_mats)
            allowed = np.array(letters)[None, :] != -last[:, None]
            parent_idx = np.broadcast_to(
                frontier_offset + start + np.arange(mats.shape[0])[:, None], allowed.shape
            )
            letter_idx = np.broadcast_to(np.array(letters)[None, :], allowed.shape)
            cand = cand[allowed]
            explored += cand.shape[0]
            if explored > budget:
                raise ResourceError(
                    f"Orbit enumeration exceeded {budget} words before radius {limit:.3f}"
                )
            cand_points = cand @ base
            inside = hyp.distance(base, cand_points) <= limit
            layer_mats.append(cand[inside])
            layer_points.append(cand_points[inside])
            layer_parent.append(parent_idx[allowed][inside])
            layer_letter.append(letter_idx[allowed][inside])

        cand_points = np.concatenate(layer_points)
        cand_mats = np.concatenate(layer_mats)
        cand_parent = np.concatenate(layer_parent)
        cand_letter = np.concatenate(layer_letter)
        if cand_points.shape[0] == 0:
            break
        tolerance = np.maximum(DEDUP_TOL, 1e-12 * cand_points[:, 0])
        duplicate = np.zeros(cand_points.shape[0], dtype=bool)
        for tree in trees:
            gap, nearest = tree.query(cand_points, k=1, distance_upper_bound=_TREE_RADIUS)
            hit = np.nonzero(np.isfinite(gap))[0]
            if hit.shape[0]:
                close = hyp.distance(tree.data[nearest[hit]], cand_points[hit]) < tolerance[hit]
                duplicate[hit[close]] = True
        if cand_points.shape[0] > 1:
            pairs = cKDTree(cand_points).query_pairs(r=_TREE_RADIUS, output_type="ndarray")
            if pairs.shape[0]:
                first, second = pairs.min(axis=1), pairs.max(axis=1)
                close = hyp.distance(cand_points[first], cand_points[second]) < tolerance[second]
                duplicate[second[close]] = True
        fresh = ~duplicate
        if not np.any(fresh):
            break
        offsets.append(sum(p.shape[0] for p in points))
        frontier_offset = offsets[-1]
        points.append(cand_points[fresh])
        parents.append(cand_parent[fresh])
        last_letters.append(cand_letter[fresh])
        trees.append(cKDTree(cand_points[fresh]))
        frontier_mats = cand_mats[fresh]
        frontier_last = cand_letter[fresh]
        logger.debug(f"Orbit layer {len(points) - 1}: {frontier_mats.shape[0]} new points")

    all_points = np.concatenate(points)
    all_parents = np.concatenate(parents)
    all_letters = np.concatenate(last_letters)
    distances = hyp.distance(base, all_points)
    selected = np.nonzero(distances <= radius)[0]
    words = [_spell(int(i), all_parents, all_letters) for i in selected]
    logger.info(
        f"Orbit ball of {group.label}: {selected.shape[0]} points within {radius} "
        f"({all_points.shape[0]} explored to {limit:.3f})"
    )
    return OrbitBall(
        words=words, points=all_points[selected], distances=distances[selected], radius=radius
    )


def _spell(index: int, parents: np.ndarray, letters: np.ndarray) -> Word:
    word: List[int] = []
    while parents[index] >= 0:
        word.append(int(letters[index]))
        index = int(parents[index])
    return tuple(reversed(word))


def orbit_counts(orbit: OrbitBall, radii: Sequence[float]) -> np.ndarray:
    """N(r) = number of orbit points within distance r, for each r."""
    ordered = np.sort(orbit.distances)
    return np.searchsorted(ordered, np.asarray(radii, dtype=float), side="right")


def growth_rate(orbit: OrbitBall, radius: Optional[float] = None, samples: int = 21) -> float:
    """Slope of log N(r) against r over [R/2, R]; approximates the critical exponent."""
    radius = orbit.radius if radius is None else radius
    radii = np.linspace(radius / 2.0, radius, samples)
    counts = orbit_counts(orbit, radii)
    if np.any(counts <= 0):
        raise ValueError("Orbit ball too small to estimate a growth rate")
    slope, _ = np.polyfit(radii, np.log(counts), 1)
    return float(slope)
