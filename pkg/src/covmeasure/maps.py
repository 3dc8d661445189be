"""Differentiable maps of R^d, finite-difference Jacobians, and the bundled maps."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EvaluationError, InvalidParameterError
from .geometry import as_points, as_vector
from .linalg import as_matrix

Batch = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class DifferentiableMap:
    """A map ``f: R^d -> R^d`` evaluated on batches of points of shape (n, d).

    ``jacobian`` returns shape (n, d, d) with ``J[k, i, j] = d f_i / d x_j``.
    Without it, Jacobians come from central differences.
    """

    forward: Batch
    dim: int
    jacobian: Batch | None = None
    inverse: Batch | None = None
    name: str = "map"

    def __call__(self, points) -> np.ndarray:
        x = as_points(points, self.dim)
        y = np.asarray(self.forward(x), dtype=float).reshape(len(x), self.dim)
        bad = ~np.all(np.isfinite(y), axis=1)
        if np.any(bad):
            raise EvaluationError(x[np.argmax(bad)])
        return y

    def jacobians(self, points, h: float = 1e-5) -> np.ndarray:
        x = as_points(points, self.dim)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(x), dtype=float).reshape(len(x), self.dim, self.dim)
        return numeric_jacobians(self, x, h)

    def pullback(self, points) -> np.ndarray:
        """Inverse images; rows where the inverse is undefined come back as NaN."""
        y = as_points(points, self.dim)
        with np.errstate(all="ignore"):
            return np.asarray(self.inverse(y), dtype=float).reshape(len(y), self.dim)


def numeric_jacobians(f: DifferentiableMap, points, h: float = 1e-5) -> np.ndarray:
    if not h > 0:
        raise InvalidParameterError("finite-difference step must be positive")
    x = as_points(points, f.dim)
    jac = np.empty((len(x), f.dim, f.dim))
    for j in range(f.dim):
        step = np.zeros(f.dim)
        step[j] = h
        jac[:, :, j] = (f(x + step) - f(x - step)) / (2 * h)
    return jac


def numeric_jacobian(f: DifferentiableMap, x, h: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian at one point; column j is (f(x+h e_j) - f(x-h e_j)) / 2h."""
    x = as_vector(x)
    if x.size != f.dim:
        raise InvalidParameterError("point dimension does not match the map")
    return numeric_jacobians(f, x.reshape(1, -1), h)[0]


def identity_map(d: int = 2) -> DifferentiableMap:
    return DifferentiableMap(
        forward=lambda x: x.copy(),
        dim=d,
        jacobian=lambda x: np.broadcast_to(np.eye(d), (len(x), d, d)).copy(),
        inverse=lambda y: y.copy(),
        name="identity",
    )


def linear_map(m) -> DifferentiableMap:
    a = as_matrix(m)
    d = a.shape[0]
    inv = None
    if abs(np.linalg.det(a)) > 1e-12:
        a_inv = np.linalg.inv(a)
        inv = lambda y: y @ a_inv.T
    return DifferentiableMap(
        forward=lambda x: x @ a.T,
        dim=d,
        jacobian=lambda x: np.broadcast_to(a, (len(x), d, d)).copy(),
        inverse=inv,
        name="linear:" + json.dumps(a.tolist()),
    )


def _polar_forward(x):
    r, t = x[:, 0], x[:, 1]
    return np.stack([r * np.cos(t), r * np.sin(t)], axis=1)


def _polar_jacobian(x):
    r, t = x[:, 0], x[:, 1]
    c, s = np.cos(t), np.sin(t)
    return np.stack([np.stack([c, -r * s], axis=1), np.stack([s, r * c], axis=1)], axis=1)


def _polar_inverse(y):
    return np.stack([np.hypot(y[:, 0], y[:, 1]), np.arctan2(y[:, 1], y[:, 0])], axis=1)


def polar_map() -> DifferentiableMap:
    """``(r, theta) -> (r cos theta, r sin theta)``; the inverse takes theta in (-pi, pi]."""
    return DifferentiableMap(_polar_forward, 2, _polar_jacobian, _polar_inverse, name="polar")


def cubic_shear_map() -> DifferentiableMap:
    """``(x, y) -> (x + y^3 / 3, y)``, a volume-preserving nonlinear diffeomorphism."""

    def forward(p):
        return np.stack([p[:, 0] + p[:, 1] ** 3 / 3, p[:, 1]], axis=1)

    def jacobian(p):
        out = np.zeros((len(p), 2, 2))
        out[:, 0, 0] = 1.0
        out[:, 0, 1] = p[:, 1] ** 2
        out[:, 1, 1] = 1.0
        return out

    def inverse(q):
        return np.stack([q[:, 0] - q[:, 1] ** 3 / 3, q[:, 1]], axis=1)

    return DifferentiableMap(forward, 2, jacobian, inverse, name="cubic-shear")


def resolve_map(spec: str) -> DifferentiableMap:
    """Look up a bundled map: ``identity``, ``identity:<d>``, ``linear:<json>``, ``shear``, ``polar``, ``cubic-shear``."""
    name, _, arg = spec.partition(":")
    if name == "identity":
        return identity_map(int(arg) if arg else 2)
    if name == "linear":
        try:
            return linear_map(json.loads(arg))
        except json.JSONDecodeError as exc:
            raise InvalidParameterError(f"bad matrix JSON in map spec: {exc}") from exc
    if name == "shear":
        return linear_map([[1.0, 1.0], [0.0, 1.0]])
    if name == "polar":
        return polar_map()
    if name == "cubic-shear":
        return cubic_shear_map()
    raise InvalidParameterError(f"unknown map {spec!r}")
