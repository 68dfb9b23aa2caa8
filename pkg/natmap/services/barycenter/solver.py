"""Barycenter of a boundary measure: Newton descent on Lambda_nu over the hyperboloid."""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from natmap.schemas.barycenter import BarycenterResult
from natmap.schemas.geometry import HPoint, HTangent
from natmap.schemas.measure import BoundaryMeasure
from natmap.services.errors import ConvergenceError, DimensionError
from natmap.services.geometry import hyperboloid as hyp

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100
ARMIJO_C = 1e-4
ROUNDING_SLACK = 1e-14
MAX_HALVINGS = 60
MIN_HESSIAN_EIG = 1e-10
GRADIENT_STEP = 0.5


def _weights(nu: BoundaryMeasure) -> np.ndarray:
    return np.asarray(nu.weights) / nu.total_mass


def _check(nu: BoundaryMeasure, x: np.ndarray) -> np.ndarray:
    nu.check_admissible()
    x = np.asarray(x, dtype=float)
    hyp.point_dimension(x, nu.dim)
    return x


def _value(nu: BoundaryMeasure, weights: np.ndarray, x: np.ndarray) -> float:
    # beta_o(x, xi) = log(-<x, xi>) for normalized ideal points
    return float(np.sum(weights * np.log(-hyp.mdot(nu.points, x))))


def _frame_terms(
    nu: BoundaryMeasure, weights: np.ndarray, x: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient coordinates and Hessian matrix of Lambda_nu in tangent_frame(x)."""
    return _terms(weights, hyp.pull_back_ideal(x, nu.points))


def _terms(weights: np.ndarray, pulled: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    grads = -pulled[:, 1:]
    gradient = weights @ grads
    hessian = np.eye(grads.shape[1]) - grads.T @ (weights[:, None] * grads)
    return gradient, hessian


def _decrease(weights: np.ndarray, pulled: np.ndarray, step: np.ndarray) -> float:
    """Lambda_nu(exp_x(step)) - Lambda_nu(x), from the atoms pulled back to the frame of x.

    With c = exp_o(step) of length r and direction d this is
    sum_i w_i log(1 + 2 sinh(r/2)^2 - sinh(r) <d, xi_i>).
    """
    length = float(np.linalg.norm(step))
    if length == 0.0:
        return 0.0
    cosine = pulled[:, 1:] @ (step / length)
    return float(weights @ np.log1p(2.0 * np.sinh(0.5 * length) ** 2 - np.sinh(length) * cosine))


def lambda_value(nu: BoundaryMeasure, x: np.ndarray) -> float:
    """Lambda_nu(x) = sum_i w_i beta_o(x, xi_i)."""
    x = _check(nu, x)
    return _value(nu, _weights(nu), x)


def lambda_grad(nu: BoundaryMeasure, x: np.ndarray) -> HTangent:
    x = _check(nu, x)
    gradient, _ = _frame_terms(nu, _weights(nu), x)
    return HTangent(base=HPoint(coords=x), vec=hyp.tangent_frame(x) @ gradient)


def lambda_hess(nu: BoundaryMeasure, x: np.ndarray) -> np.ndarray:
    """Hessian of Lambda_nu at x as a symmetric matrix in the frame tangent_frame(x)."""
    x = _check(nu, x)
    _, hessian = _frame_terms(nu, _weights(nu), x)
    return hessian


def initial_guess(nu: BoundaryMeasure) -> np.ndarray:
    """Lift of the weighted Euclidean mean of the atoms; its time coordinate is 1."""
    mean = _weights(nu) @ nu.points
    spatial2 = float(np.sum(mean[1:] ** 2))
    if spatial2 >= 1.0:
        raise DimensionError("Atoms are concentrated at one boundary point")
    return mean / np.sqrt(1.0 - spatial2)


def barycenter(
    nu: BoundaryMeasure,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    start: Optional[np.ndarray] = None,
) -> BarycenterResult:
    """Minimize Lambda_nu by Newton steps with Armijo backtracking.

    Each iteration pulls the atoms back to the frame of the current point, so
    gradient, Hessian and the decrease of Lambda_nu along a step are evaluated
    near o whatever the distance of the iterate from o. Steps are retracted with
    the exponential map. Where the Hessian is close to singular the iteration
    falls back to a damped gradient step. A step that fails the Armijo test is
    still taken when Lambda_nu changes by no more than ROUNDING_SLACK and the
    gradient norm drops, which covers decreases below rounding level near the
    minimum.

    Args:
        nu: Admissible boundary measure.
        tol: Target g-norm of the gradient of Lambda_nu.
        max_iter: Newton iteration budget.
        start: Optional initial point; the lifted Euclidean mean by default.

    Returns:
        BarycenterResult: Point, residual, iteration count, Hessian bound and Lambda trace.

    Raises:
        InadmissibleMeasureError: If an atom carries weight >= 1/2.
        ConvergenceError: If the residual is still above tol after max_iter iterations.
    """
    nu.check_admissible()
    weights = _weights(nu)
    x = initial_guess(nu) if start is None else _check(nu, start)
    value = _value(nu, weights, x)
    history = [value]
    pulled = hyp.pull_back_ideal(x, nu.points)
    gradient, hessian = _terms(weights, pulled)
    residual = float(np.linalg.norm(gradient))

    iterations = 0
    while residual >= tol:
        if iterations >= max_iter:
            raise ConvergenceError(
                f"Barycenter did not converge in {max_iter} iterations (residual {residual:.3e})",
                residual=residual,
            )
        iterations += 1
        min_eig = float(np.linalg.eigvalsh(hessian)[0])
        if min_eig < MIN_HESSIAN_EIG:
            step = -GRADIENT_STEP * gradient
        else:
            step = -np.linalg.solve(hessian, gradient)
        slope = float(gradient @ step)
        frame = hyp.tangent_frame(x)

        t = 1.0
        for _ in range(MAX_HALVINGS):
            candidate = hyp.exp_map(x, t * (frame @ step))
            change = _decrease(weights, pulled, t * step)
            candidate_pulled = hyp.pull_back_ideal(candidate, nu.points)
            candidate_terms = _terms(weights, candidate_pulled)
            if change <= ARMIJO_C * t * slope:
                break
            if change <= ROUNDING_SLACK and float(np.linalg.norm(candidate_terms[0])) < residual:
                break
            t *= 0.5
        else:
            logger.debug(f"Line search stalled at iteration {iterations} (residual {residual:.3e})")
            break

        x, value, pulled = candidate, value + change, candidate_pulled
        history.append(value)
        gradient, hessian = candidate_terms
        residual = float(np.linalg.norm(gradient))
        logger.debug(f"Newton iteration {iterations}: step {t:.3g}, residual {residual:.3e}")

    if residual >= tol:
        raise ConvergenceError(
            f"Barycenter line search stalled with residual {residual:.3e}", residual=residual
        )
    return BarycenterResult(
        point=x,
        residual=residual,
        iterations=iterations,
        hessian_min_eig=float(np.linalg.eigvalsh(hessian)[0]),
        lambda_history=history,
    )
