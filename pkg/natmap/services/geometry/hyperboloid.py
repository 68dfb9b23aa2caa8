"""Closed-form kernel for real hyperbolic space in the hyperboloid model."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from scipy.stats import special_ortho_group

from natmap.services.errors import DimensionError, InvalidPointError

logger = logging.getLogger(__name__)

POINT_TOL = 1e-9
ISOMETRY_TOL = 1e-10
DISTANCE_TOL = 1e-9


def minkowski_form(dim: int) -> np.ndarray:
    """Return J = diag(-1, 1, ..., 1) acting on R^{dim+1}."""
    form = np.eye(dim + 1)
    form[0, 0] = -1.0
    return form


def mdot(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minkowski pairing over the last axis, broadcasting over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def origin(dim: int) -> np.ndarray:
    if dim < 1:
        raise DimensionError(f"Hyperbolic dimension must be >= 1, got {dim}")
    point = np.zeros(dim + 1)
    point[0] = 1.0
    return point


def project(a: np.ndarray) -> np.ndarray:
    """Renormalize a timelike future vector onto the hyperboloid."""
    a = np.asarray(a, dtype=float)
    norm2 = -mdot(a, a)
    if np.any(norm2 <= 0.0) or np.any(a[..., 0] <= 0.0):
        raise InvalidPointError("Vector is not timelike and future pointing")
    return a / np.sqrt(norm2)[..., None]


def check_point(a: np.ndarray, tol: float = POINT_TOL) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim < 1 or a.shape[-1] < 2:
        raise DimensionError(f"Point must have at least 2 coordinates, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidPointError("Point has non-finite coordinates")
    defect = np.max(np.abs(mdot(a, a) + 1.0) / np.maximum(1.0, a[..., 0] ** 2))
    if defect > tol or np.any(a[..., 0] <= 0.0):
        raise InvalidPointError(f"Point is off the upper hyperboloid sheet (defect {defect:.3e})")
    return a


def check_ideal_point(xi: np.ndarray, tol: float = POINT_TOL) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if np.any(xi[..., 0] <= 0.0):
        raise InvalidPointError("Ideal point must have positive time coordinate")
    defect = np.max(np.abs(mdot(xi, xi)) / xi[..., 0] ** 2)
    if defect > tol:
        raise InvalidPointError(f"Ideal point is not null (defect {defect:.3e})")
    return xi


def normalize_ideal(xi: np.ndarray) -> np.ndarray:
    """Scale null vectors so that <xi, o> = -1, i.e. xi[0] = 1."""
    xi = np.asarray(xi, dtype=float)
    return xi / xi[..., :1]


def ideal_point(direction: np.ndarray) -> np.ndarray:
    """Ideal point (1, theta / |theta|) for a nonzero spatial direction."""
    direction = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(direction, axis=-1, keepdims=True)
    if np.any(norm == 0.0):
        raise InvalidPointError("Direction of an ideal point must be nonzero")
    ones = np.ones(direction.shape[:-1] + (1,))
    return np.concatenate([ones, direction / norm], axis=-1)


def distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hyperbolic distance arccosh(-<a, b>), evaluated through the chordal form."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    pairing = -mdot(a, b)
    scale = np.maximum(1.0, np.abs(a[..., 0] * b[..., 0]))
    if np.any(pairing < 1.0 - DISTANCE_TOL * scale):
        raise InvalidPointError(
            f"arccosh argument below 1 ({np.min(pairing):.12f}); inputs are not hyperboloid points"
        )
    delta = a - b
    chord2 = np.maximum(mdot(delta, delta), 0.0)
    return 2.0 * np.arcsinh(np.sqrt(chord2) / 2.0)


def busemann(b: np.ndarray, a: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """beta_b(a, xi) = log(<a, xi> / <b, xi>)."""
    return np.log(mdot(a, xi) / mdot(b, xi))


def busemann_grad(a: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Gradient of beta(., xi) at a as an ambient tangent vector; it has unit norm."""
    a = np.asarray(a, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return xi / mdot(a, xi)[..., None] + a


def busemann_hess(a: np.ndarray, xi: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Hessian g(u, v) - d beta(u) d beta(v) of the Busemann function at a."""
    grad = busemann_grad(a, xi)
    return mdot(u, v) - mdot(grad, u) * mdot(grad, v)


def boost(a: np.ndarray) -> np.ndarray:
    """The pure boost L_a sending the origin to a."""
    a = np.asarray(a, dtype=float)
    spatial = a[1:]
    dim = spatial.shape[0]
    matrix = np.empty((dim + 1, dim + 1))
    matrix[0, 0] = a[0]
    matrix[0, 1:] = spatial
    matrix[1:, 0] = spatial
    matrix[1:, 1:] = np.eye(dim) + np.outer(spatial, spatial) / (1.0 + a[0])
    return matrix


def tangent_frame(a: np.ndarray) -> np.ndarray:
    """Orthonormal frame of T_a as the columns of an (n+1) x n matrix."""
    return boost(a)[:, 1:]


def frame_coordinates(frame: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Coordinates of tangent vectors (rows) in an orthonormal frame (columns)."""
    dim = frame.shape[0] - 1
    return np.asarray(vectors, dtype=float) @ minkowski_form(dim) @ frame


def tangent_norm(v: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(mdot(v, v), 0.0))


def exp_map(a: np.ndarray, v: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    norm = float(tangent_norm(v))
    if norm < 1e-15:
        return project(a + v)
    return project(np.cosh(norm) * a + np.sinh(norm) * v / norm)


def log_map(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    direction = b + mdot(a, b) * a
    length = float(tangent_norm(direction))
    if length < 1e-15:
        return np.zeros_like(a)
    return float(distance(a, b)) * direction / length


def geodesic(a: np.ndarray, v: np.ndarray, t: float) -> np.ndarray:
    """Point at time t on the unit-speed geodesic from a with direction v."""
    return exp_map(a, t * np.asarray(v, dtype=float) / float(tangent_norm(v)))


def check_isometry(matrix: np.ndarray, tol: float = ISOMETRY_TOL) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 2:
        raise DimensionError(f"Isometry must be a square matrix, got shape {matrix.shape}")
    form = minkowski_form(matrix.shape[0] - 1)
    scale = max(1.0, float(np.max(np.abs(matrix))) ** 2)
    defect = float(np.max(np.abs(matrix.T @ form @ matrix - form))) / scale
    if defect > tol:
        raise InvalidPointError(f"Matrix does not preserve the Minkowski form (defect {defect:.3e})")
    if matrix[0, 0] <= 0.0:
        raise InvalidPointError("Matrix does not preserve the upper sheet")
    return matrix


def inverse_isometry(matrix: np.ndarray) -> np.ndarray:
    """M^{-1} = J M^T J for M in O(n, 1)."""
    matrix = np.asarray(matrix, dtype=float)
    form = minkowski_form(matrix.shape[-1] - 1)
    return form @ np.swapaxes(matrix, -1, -2) @ form


def apply_isometry(matrix: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Act on a point or a stack of points, re-projecting onto the hyperboloid.

    Leading axes of matrix and a broadcast, so a stack of isometries can act on one point.
    """
    matrix = np.asarray(matrix, dtype=float)
    return project(np.einsum("...ij,...j->...i", matrix, np.asarray(a, dtype=float)))


def apply_boundary(matrix: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Boundary action xi -> normalize(M xi) on one or many ideal points."""
    return normalize_ideal(
        np.einsum("...ij,...j->...i", np.asarray(matrix, dtype=float), np.asarray(xi, dtype=float))
    )


def corner_inject(matrix: np.ndarray, m: int) -> np.ndarray:
    """Upper-left corner injection of O(n, 1) into O(m, 1)."""
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[-1] - 1
    if m < n:
        raise DimensionError(f"Cannot inject H^{n} isometries into H^{m}")
    out = np.broadcast_to(np.eye(m + 1), matrix.shape[:-2] + (m + 1, m + 1)).copy()
    out[..., : n + 1, : n + 1] = matrix
    return out


def geodesic_embed(a: np.ndarray, m: int) -> np.ndarray:
    """Totally geodesic embedding H^n -> H^m by zero padding; also valid for ideal points."""
    a = np.asarray(a, dtype=float)
    n = a.shape[-1] - 1
    if m < n:
        raise DimensionError(f"Cannot embed H^{n} into H^{m}")
    pad = [(0, 0)] * (a.ndim - 1) + [(0, m - n)]
    return np.pad(a, pad)


def rotation(dim: int, spatial: np.ndarray) -> np.ndarray:
    matrix = np.eye(dim + 1)
    matrix[1:, 1:] = spatial
    return matrix


def plane_rotation(dim: int, angle: float, i: int = 1, j: int = 2) -> np.ndarray:
    """Rotation by angle in the spatial (x_i, x_j) plane."""
    matrix = np.eye(dim + 1)
    c, s = np.cos(angle), np.sin(angle)
    matrix[i, i], matrix[i, j] = c, -s
    matrix[j, i], matrix[j, j] = s, c
    return matrix


def axis_boost(dim: int, t: float, axis: int = 1) -> np.ndarray:
    """Translation of length t along the geodesic through o in direction e_axis."""
    matrix = np.eye(dim + 1)
    matrix[0, 0] = matrix[axis, axis] = np.cosh(t)
    matrix[0, axis] = matrix[axis, 0] = np.sinh(t)
    return matrix


def random_point(dim: int, rng: np.random.Generator, radius: float = 1.0) -> np.ndarray:
    """Point at distance uniform in [0, radius] from o in a uniform direction."""
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    r = radius * rng.random()
    return np.concatenate([[np.cosh(r)], np.sinh(r) * direction])


def random_ideal_point(dim: int, rng: np.random.Generator) -> np.ndarray:
    return ideal_point(rng.standard_normal(dim))


def random_isometry(dim: int, rng: np.random.Generator, radius: float = 1.0) -> np.ndarray:
    """Boost to a random point composed with a Haar-random rotation."""
    if dim >= 2:
        spatial = special_ortho_group.rvs(dim, random_state=rng)
    else:
        spatial = np.eye(1)
    return boost(random_point(dim, rng, radius)) @ rotation(dim, spatial)


def to_ball(a: np.ndarray) -> np.ndarray:
    """Poincare ball coordinates a_s / (1 + a_0)."""
    a = np.asarray(a, dtype=float)
    return a[..., 1:] / (1.0 + a[..., :1])


def from_ball(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    norm2 = np.sum(y * y, axis=-1, keepdims=True)
    if np.any(norm2 >= 1.0):
        raise InvalidPointError("Ball coordinates must lie in the open unit ball")
    return np.concatenate([1.0 + norm2, 2.0 * y], axis=-1) / (1.0 - norm2)


def point_dimension(a: np.ndarray, expected: Optional[int] = None) -> int:
    dim = np.asarray(a).shape[-1] - 1
    if expected is not None and dim != expected:
        raise DimensionError(f"Expected a point of H^{expected}, got H^{dim}")
    return dim


def pull_back_ideal(a: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Ideal points L_a^{-1} xi for the boost L_a = boost(a), normalized so xi[0] = 1.

    The action is split along the axis u of a: components orthogonal to u are
    unchanged, and with s = 1 - <u, xi> the time and u components are
    e^{-r} + sinh(r) s and e^{-r} - cosh(r) s. Atoms close to u keep full
    relative precision when a is far from o, which the matrix product loses.
    """
    a = np.asarray(a, dtype=float)
    xi = normalize_ideal(xi)[..., 1:]
    sinh_r = float(np.linalg.norm(a[1:]))
    if sinh_r == 0.0:
        return np.concatenate([np.ones(xi.shape[:-1] + (1,)), xi], axis=-1)
    cosh_r = float(np.hypot(1.0, sinh_r))
    axis = a[1:] / sinh_r
    along = xi @ axis
    perp = xi - along[..., None] * axis
    # 1 - <u, xi> without cancellation for atoms near u
    s = np.where(along > 0.0, np.sum(perp**2, axis=-1) / (1.0 + np.abs(along)), 1.0 - along)
    near = 1.0 / (cosh_r + sinh_r)
    time = near + sinh_r * s
    spatial = perp + (near - cosh_r * s)[..., None] * axis
    return np.concatenate([np.ones(time.shape + (1,)), spatial / time[..., None]], axis=-1)


def frame_busemann_gradients(a: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Coordinates of grad beta(., xi_i) at a in the frame tangent_frame(a), one row per ideal point.

    Pulling xi back by the boost L_a puts a at o, where the gradient is the unit
    vector pointing away from xi.
    """
    return -pull_back_ideal(a, xi)[..., 1:]
