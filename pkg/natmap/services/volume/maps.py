"""Equivariant maps with differentiable slices, as consumed by the volume integrator."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import Dict, Hashable, Optional, Tuple

import numpy as np

from natmap.schemas.cocycle import Cocycle, EquivarianceReport
from natmap.schemas.lattice import GroupPresentation, Word
from natmap.schemas.natural_map import NaturalMapEvaluator
from natmap.services.cocycles.boundary_map import slice_key
from natmap.services.cocycles.cocycle import evaluate, random_word
from natmap.services.cocycles.space import act_word
from natmap.services.errors import DimensionError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.lattice.groups import alphabet, evaluate_word, inverse_word, letter_matrix
from natmap.services.natural_map.evaluator import differential, natural_point

logger = logging.getLogger(__name__)

# (jacobian, smallest singular value, largest singular value, implicit residual)
SliceValues = Tuple[float, float, float, float]
FOLD_TOL = 1e-12
MAX_FOLD_STEPS = 200


class EquivariantMapSpec(ABC):
    """Phi: H^n x X -> H^m, sigma-equivariant, evaluated slice by slice."""

    kind = "map"

    def __init__(self, cocycle: Cocycle):
        self.cocycle = cocycle

    @property
    def source_dim(self) -> int:
        return self.cocycle.source_dim

    @property
    def target_dim(self) -> int:
        return self.cocycle.target_dim

    @property
    def space_size(self) -> int:
        return self.cocycle.space.size

    @abstractmethod
    def point(self, a: np.ndarray, x: int) -> np.ndarray:
        """Phi(a, x)."""

    @abstractmethod
    def slice_values(self, a: np.ndarray, x: int) -> SliceValues:
        """Jacobian data of Phi_x at a."""

    def slice_key(self, x: int) -> Hashable:
        return x

    def cell_values(self, a: np.ndarray) -> np.ndarray:
        """Slice values at a for every x, rows of (jac, s_min, s_max, residual).

        Points sharing a slice key share one evaluation.
        """
        cache: Dict[Hashable, SliceValues] = {}
        rows = []
        for x in range(self.space_size):
            key = self.slice_key(x)
            if key not in cache:
                cache[key] = self.slice_values(a, x)
            rows.append(cache[key])
        return np.asarray(rows, dtype=float)


def _singular_summary(matrix: np.ndarray, residual: float = 0.0) -> SliceValues:
    values = np.linalg.svd(matrix, compute_uv=False)
    return float(np.prod(values)), float(values[-1]), float(values[0]), residual


class NaturalMapSpec(EquivariantMapSpec):
    """The natural map F(a, x) = bar((phi_x)_* nu_a)."""

    kind = "natural"

    def __init__(self, evaluator: NaturalMapEvaluator):
        super().__init__(evaluator.cocycle)
        self.evaluator = evaluator

    def point(self, a: np.ndarray, x: int) -> np.ndarray:
        return natural_point(self.evaluator, a, x)

    def slice_values(self, a: np.ndarray, x: int) -> SliceValues:
        diff = differential(self.evaluator, a, x)
        return _singular_summary(diff.matrix, diff.residual)

    def slice_key(self, x: int) -> Hashable:
        return slice_key(self.evaluator.boundary.slices[x])


class ChainMapSpec(EquivariantMapSpec):
    """Phi(a, x) = outer(x) j_{n,m}(inner a), a totally geodesic embedding per slice.

    inner must commute with the lattice for Phi to stay equivariant; the
    identity is the usual choice.
    """

    kind = "chain"

    def __init__(
        self, cocycle: Cocycle, outer: Optional[np.ndarray] = None, inner: Optional[np.ndarray] = None
    ):
        super().__init__(cocycle)
        n, m = self.source_dim, self.target_dim
        self.inner = np.eye(n + 1) if inner is None else np.asarray(inner, dtype=float)
        if outer is None:
            outer = np.broadcast_to(np.eye(m + 1), (self.space_size, m + 1, m + 1))
        self.outer = np.asarray(outer, dtype=float)
        if self.outer.shape != (self.space_size, m + 1, m + 1) or self.inner.shape != (n + 1, n + 1):
            raise DimensionError("Chain map isometries do not match the cocycle dimensions")

    def _linear(self, x: int) -> np.ndarray:
        return self.outer[x][:, : self.source_dim + 1] @ self.inner

    def point(self, a: np.ndarray, x: int) -> np.ndarray:
        return hyp.project(self._linear(x) @ np.asarray(a, dtype=float))

    def slice_values(self, a: np.ndarray, x: int) -> SliceValues:
        a = np.asarray(a, dtype=float)
        image = self.point(a, x)
        pushed = (self._linear(x) @ hyp.tangent_frame(a)).T
        matrix = hyp.frame_coordinates(hyp.tangent_frame(image), pushed).T
        return _singular_summary(matrix)

    def slice_key(self, x: int) -> Hashable:
        return self.outer[x].tobytes()


def fold(group: GroupPresentation, a: np.ndarray) -> Tuple[Word, np.ndarray]:
    """Greedy reduction of a into the Dirichlet domain about o.

    Returns a word lambda and b with a = lambda . b; each step applies the
    generator bringing the point closest to o.
    """
    letters = alphabet(group.rank)
    if not letters:
        return (), np.asarray(a, dtype=float)
    mats = np.stack([letter_matrix(group, l) for l in letters])
    base = group.base
    current = np.asarray(a, dtype=float)
    word = []
    for _ in range(MAX_FOLD_STEPS):
        candidates = current @ np.swapaxes(mats, 1, 2)
        distances = hyp.distance(base, candidates)
        best = int(np.argmin(distances))
        if distances[best] >= float(hyp.distance(base, current)) - FOLD_TOL:
            break
        current = hyp.project(candidates[best])
        word.append(-letters[best])
    else:
        logger.warning(f"Folding did not settle after {MAX_FOLD_STEPS} steps")
    return tuple(word), current


class FoldedMapSpec(EquivariantMapSpec):
    """Equivariant extension of a map given on the Dirichlet domain.

    Writing a = lambda . b with b in the domain, Phi(a, x) = sigma(lambda, lambda^-1 x) Psi(b, lambda^-1 x).
    """

    kind = "folded"

    def __init__(self, inner: EquivariantMapSpec):
        super().__init__(inner.cocycle)
        self.inner = inner
        self.kind = f"folded-{inner.kind}"

    def _unfold(self, a: np.ndarray, x: int) -> Tuple[Word, np.ndarray, int]:
        word, b = fold(self.cocycle.group, a)
        y = act_word(self.cocycle.space, inverse_word(word), x)
        return word, b, y

    def point(self, a: np.ndarray, x: int) -> np.ndarray:
        word, b, y = self._unfold(a, x)
        return hyp.apply_isometry(evaluate(self.cocycle, word, y), self.inner.point(b, y))

    def slice_values(self, a: np.ndarray, x: int) -> SliceValues:
        # isometries on both sides leave the singular values unchanged
        _, b, y = self._unfold(a, x)
        return self.inner.slice_values(b, y)

    def cell_values(self, a: np.ndarray) -> np.ndarray:
        word, b = fold(self.cocycle.group, a)
        inner_values = self.inner.cell_values(b)
        pulled = [act_word(self.cocycle.space, inverse_word(word), x) for x in range(self.space_size)]
        return inner_values[pulled]


def map_equivariance(
    phi: EquivariantMapSpec,
    samples: int,
    rng: np.random.Generator,
    radius: float = 1.0,
    max_length: int = 2,
) -> EquivarianceReport:
    """Max of |Phi(g a, g x) - sigma(g, x) Phi(a, x)| over random (g, a, x)."""
    sigma = phi.cocycle
    worst, worst_word, worst_point = 0.0, (), 0
    for _ in range(samples):
        word = random_word(sigma.group.rank, rng, max_length)
        x = int(rng.integers(sigma.space.size))
        a = hyp.random_point(phi.source_dim, rng, radius)
        moved = hyp.apply_isometry(evaluate_word(sigma.group, word), a)
        lhs = phi.point(moved, act_word(sigma.space, word, x))
        rhs = hyp.apply_isometry(evaluate(sigma, word, x), phi.point(a, x))
        deviation = float(np.max(np.abs(lhs - rhs)) / max(1.0, float(rhs[0])))
        if deviation > worst:
            worst, worst_word, worst_point = deviation, word, x
    logger.info(f"{phi.kind} map equivariance over {samples} samples: max deviation {worst:.3e}")
    return EquivarianceReport(
        samples=samples, max_deviation=worst, worst_word=list(worst_word), worst_point=worst_point
    )
