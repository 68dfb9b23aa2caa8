"""Numerical audit of the chain of inequalities bounding the slice Jacobian."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from natmap.schemas.cocycle import EquivarianceReport
from natmap.schemas.natural_map import BoundAudit, NaturalMapEvaluator, SliceDifferential
from natmap.services.cocycles.cocycle import evaluate, random_word
from natmap.services.cocycles.space import act_word
from natmap.services.errors import DimensionError
from natmap.services.geometry import hyperboloid as hyp
from natmap.services.lattice.groups import evaluate_word
from natmap.services.natural_map.evaluator import jacobian, natural_point

logger = logging.getLogger(__name__)

_PINV_CUTOFF = 1e-12


def _inverse_sqrt(form: np.ndarray) -> np.ndarray:
    """Pseudo-inverse square root of a positive semidefinite matrix."""
    values, vectors = np.linalg.eigh(form)
    scale = np.where(values > _PINV_CUTOFF * max(1.0, float(values[-1])), values, np.inf)
    return (vectors / np.sqrt(scale)) @ vectors.T


def cauchy_schwarz_gap(diff: SliceDifferential, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """delta sqrt(h(v, v)) sqrt(h'(u, u)) - k(J u, v) for rows u (source) and v (target)."""
    u = np.atleast_2d(np.asarray(u, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if u.shape[1] != diff.source_dim or v.shape[1] != diff.target_dim:
        raise DimensionError("Tangent coordinates do not match the differential")
    h_vv = np.einsum("ij,jk,ik->i", v, diff.h, v)
    hp_uu = np.einsum("ij,jk,ik->i", u, diff.hp, u)
    k_ju_v = np.einsum("ij,jk,ik->i", v, diff.k @ diff.matrix, u)
    return diff.delta * np.sqrt(np.maximum(h_vv, 0.0) * np.maximum(hp_uu, 0.0)) - k_ju_v


def bcg_bound_audit(diff: SliceDifferential, p: Optional[int] = None) -> BoundAudit:
    """Margins of every step bounding jac^p of D_a F_x.

    U is spanned by the top p right singular vectors of J and V = J(U). The steps:
    det K^V jac <= delta^p sqrt(det H^V det H'^U) (determinant Cauchy-Schwarz),
    det H'^U <= (tr H'^U / p)^p <= p^-p (trace step), hence
    jac <= delta^p p^(-p/2) sqrt(det H^V) / det K^V, and for p >= 3 that bound is <= 1.
    """
    p = diff.source_dim if p is None else p
    jac = jacobian(diff, p)
    left, _, right_t = np.linalg.svd(diff.matrix)
    q_u = right_t[:p].T
    q_v = left[:, :p]
    h_v = q_v.T @ diff.h @ q_v
    k_v = q_v.T @ diff.k @ q_v
    hp_u = q_u.T @ diff.hp @ q_u
    det_h_v = max(float(np.linalg.det(h_v)), 0.0)
    det_k_v = float(np.linalg.det(k_v))
    det_hp_u = max(float(np.linalg.det(hp_u)), 0.0)
    delta_p = diff.delta**p

    operator = _inverse_sqrt(diff.h) @ diff.k @ diff.matrix @ _inverse_sqrt(diff.hp)
    cs_ratio = float(np.linalg.norm(operator, 2)) / diff.delta
    chain_bound = delta_p * p ** (-p / 2.0) * np.sqrt(det_h_v) / det_k_v
    b1_applicable = p >= 3
    audit = BoundAudit(
        p=p,
        jacobian=jac,
        cs_operator_ratio=cs_ratio,
        cs_det_margin=delta_p * np.sqrt(det_h_v * det_hp_u) - det_k_v * jac,
        trace_margin=float(p ** (-p)) - det_hp_u,
        chain_bound=float(chain_bound),
        chain_margin=float(chain_bound - jac),
        b1_applicable=b1_applicable,
        b1_margin=float(1.0 - chain_bound) if b1_applicable else None,
    )
    if not audit.holds:
        logger.warning(f"Jacobian bound chain fails at x={diff.x}: {audit.model_dump()}")
    return audit


def check_natural_equivariance(
    ev: NaturalMapEvaluator,
    samples: int,
    rng: np.random.Generator,
    radius: float = 1.0,
    max_length: int = 2,
) -> EquivarianceReport:
    """Max of |F(g a, g x) - sigma(g, x) F(a, x)| over random (g, a, x)."""
    sigma = ev.cocycle
    worst, worst_word, worst_point = 0.0, (), 0
    for _ in range(samples):
        word = random_word(sigma.group.rank, rng, max_length)
        x = int(rng.integers(sigma.space.size))
        a = hyp.random_point(ev.source_dim, rng, radius)
        moved = hyp.apply_isometry(evaluate_word(sigma.group, word), a)
        lhs = natural_point(ev, moved, act_word(sigma.space, word, x))
        rhs = hyp.apply_isometry(evaluate(sigma, word, x), natural_point(ev, a, x))
        deviation = float(np.max(np.abs(lhs - rhs)))
        if deviation > worst:
            worst, worst_word, worst_point = deviation, word, x
    logger.info(f"Natural map equivariance over {samples} samples: max deviation {worst:.3e}")
    return EquivarianceReport(
        samples=samples, max_deviation=worst, worst_word=list(worst_word), worst_point=worst_point
    )
