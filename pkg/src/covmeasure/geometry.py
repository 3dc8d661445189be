"""Points, norms, boxes, balls and regions of R^d, plus grid covers of regions."""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidParameterError


def as_vector(coords, name: str = "vector") -> np.ndarray:
    v = np.array(coords, dtype=float).reshape(-1)
    if v.size < 1:
        raise InvalidParameterError(f"{name} must have at least one coordinate")
    if not np.all(np.isfinite(v)):
        raise InvalidParameterError(f"{name} has non-finite coordinates")
    return v


def as_points(points, dim: int | None = None) -> np.ndarray:
    """Coerce to a float array of shape (n, d)."""
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x.reshape(1, -1) if dim is None or x.size == dim else x.reshape(-1, 1)
    return x


class Norm(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    SUP = "sup"

    def __call__(self, v) -> np.ndarray | float:
        """Norm along the last axis."""
        v = np.asarray(v, dtype=float)
        if self is Norm.EUCLIDEAN:
            out = np.sqrt(np.sum(v * v, axis=-1))
        else:
            out = np.max(np.abs(v), axis=-1)
        return float(out) if np.ndim(out) == 0 else out

    def distance(self, x, y):
        return self(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))

    def unit_ball_volume(self, d: int) -> float:
        if self is Norm.SUP:
            return 2.0**d
        return math.pi ** (d / 2) / math.gamma(d / 2 + 1)

    def sample_unit_ball(self, rng: np.random.Generator, n: int, d: int) -> np.ndarray:
        """``n`` points uniform in the closed unit ball of this norm."""
        if self is Norm.SUP:
            return rng.uniform(-1.0, 1.0, size=(n, d))
        g = rng.standard_normal((n, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        return g * rng.random((n, 1)) ** (1.0 / d)


class Region:
    """A bounded region of R^d known through a membership test and a bounding box."""

    dim: int

    def contains(self, points) -> np.ndarray:
        raise NotImplementedError

    def bounding_box(self) -> Box:
        raise NotImplementedError

    def cell_intersects(self, lower: np.ndarray, upper: np.ndarray) -> bool:
        """Whether the closed cell ``[lower, upper]`` meets the region.

        The default probes a lattice of points in the cell (corners and faces
        included); subclasses with closed-form geometry override it.
        """
        probes = _cell_probes(lower, upper)
        return bool(np.any(self.contains(probes)))

    def cell_inside(self, lower: np.ndarray, upper: np.ndarray) -> bool:
        probes = _cell_probes(lower, upper)
        return bool(np.all(self.contains(probes)))


def _cell_probes(lower: np.ndarray, upper: np.ndarray, per_axis: int = 5) -> np.ndarray:
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in zip(lower, upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


@dataclass(frozen=True, eq=False)
class Box(Region):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lower, "lower corner")
        hi = as_vector(self.upper, "upper corner")
        if lo.shape != hi.shape:
            raise InvalidParameterError("box corners differ in dimension")
        if np.any(lo > hi):
            raise InvalidParameterError("box lower corner exceeds upper corner")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def __repr__(self) -> str:
        return f"Box({self.lower.tolist()}, {self.upper.tolist()})"

    @classmethod
    def cube(cls, center, half_side: float) -> Box:
        c = as_vector(center)
        return cls(c - half_side, c + half_side)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def volume(self) -> float:
        return box_volume(self)

    def corners(self) -> np.ndarray:
        return np.array(list(itertools.product(*zip(self.lower, self.upper))), dtype=float)

    def contains(self, points) -> np.ndarray:
        x = as_points(points, self.dim)
        return np.all((x >= self.lower) & (x <= self.upper), axis=1)

    def bounding_box(self) -> Box:
        return self

    def cell_intersects(self, lower, upper) -> bool:
        return bool(np.all(lower <= self.upper) and np.all(upper >= self.lower))

    def cell_inside(self, lower, upper) -> bool:
        return bool(np.all(lower >= self.lower) and np.all(upper <= self.upper))

    def sample_boundary(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` points on the boundary faces, each pinned to a random face."""
        x = self.lower + rng.random((n, self.dim)) * self.widths
        axis = rng.integers(0, self.dim, size=n)
        side = rng.integers(0, 2, size=n)
        rows = np.arange(n)
        x[rows, axis] = np.where(side == 0, self.lower[axis], self.upper[axis])
        return x


@dataclass(frozen=True, eq=False)
class Ball(Region):
    center: np.ndarray
    radius: float
    norm: Norm = Norm.EUCLIDEAN

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center, "center"))
        if not (self.radius >= 0 and math.isfinite(self.radius)):
            raise InvalidParameterError("ball radius must be finite and nonnegative")
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "norm", Norm(self.norm))

    def __repr__(self) -> str:
        return f"Ball({self.center.tolist()}, {self.radius}, {self.norm.value})"

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def volume(self) -> float:
        return self.norm.unit_ball_volume(self.dim) * self.radius**self.dim

    def contains(self, points) -> np.ndarray:
        x = as_points(points, self.dim)
        return np.asarray(self.norm(x - self.center) <= self.radius).reshape(-1)

    def bounding_box(self) -> Box:
        return Box(self.center - self.radius, self.center + self.radius)

    def cell_intersects(self, lower, upper) -> bool:
        nearest = np.clip(self.center, lower, upper)
        return bool(self.norm(nearest - self.center) <= self.radius)

    def cell_inside(self, lower, upper) -> bool:
        far = np.where(np.abs(lower - self.center) > np.abs(upper - self.center), lower, upper)
        return bool(self.norm(far - self.center) <= self.radius)


@dataclass(frozen=True, eq=False)
class PredicateRegion(Region):
    """A region given by a trusted vectorized membership oracle and a finite bounding box."""

    predicate: Callable[[np.ndarray], np.ndarray]
    bounds: Box
    name: str = "predicate"

    @property
    def dim(self) -> int:
        return self.bounds.dim

    def contains(self, points) -> np.ndarray:
        x = as_points(points, self.dim)
        return np.asarray(self.predicate(x), dtype=bool).reshape(-1)

    def bounding_box(self) -> Box:
        return self.bounds


@dataclass(frozen=True, eq=False)
class HalfSpace(Region):
    """``{x : normal . x >= offset}`` clipped to a bounding box."""

    normal: np.ndarray
    offset: float
    bounds: Box

    def __post_init__(self):
        object.__setattr__(self, "normal", as_vector(self.normal, "normal"))
        if self.normal.size != self.bounds.dim:
            raise InvalidParameterError("half-space normal and bounding box differ in dimension")

    @property
    def dim(self) -> int:
        return self.bounds.dim

    def contains(self, points) -> np.ndarray:
        x = as_points(points, self.dim)
        return (x @ self.normal >= self.offset) & self.bounds.contains(x)

    def bounding_box(self) -> Box:
        return self.bounds

    def cell_intersects(self, lower, upper) -> bool:
        if not self.bounds.cell_intersects(lower, upper):
            return False
        lo = np.maximum(lower, self.bounds.lower)
        hi = np.minimum(upper, self.bounds.upper)
        best = np.where(self.normal >= 0, hi, lo)
        return bool(best @ self.normal >= self.offset)


@dataclass(frozen=True, eq=False)
class Intersection(Region):
    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise InvalidParameterError("intersection needs at least one region")
        if len({p.dim for p in parts}) != 1:
            raise InvalidParameterError("intersected regions differ in dimension")
        object.__setattr__(self, "parts", parts)

    @property
    def dim(self) -> int:
        return self.parts[0].dim

    def contains(self, points) -> np.ndarray:
        x = as_points(points, self.dim)
        inside = np.ones(len(x), dtype=bool)
        for part in self.parts:
            inside &= part.contains(x)
        return inside

    def bounding_box(self) -> Box:
        boxes = [p.bounding_box() for p in self.parts]
        lo = np.max([b.lower for b in boxes], axis=0)
        hi = np.min([b.upper for b in boxes], axis=0)
        return Box(lo, np.maximum(lo, hi))


def box_volume(b: Box) -> float:
    return float(np.prod(b.upper - b.lower))


@dataclass(frozen=True)
class MeshCell:
    box: Box
    center: np.ndarray
    index: tuple = field(default=())


def grid_shape(bounds: Box, epsilon: float) -> tuple[int, ...]:
    # the 1e-9 slack keeps exact multiples (0.5 / 0.1) from spilling into an extra cell
    return tuple(max(1, math.ceil(w / epsilon - 1e-9)) for w in bounds.widths)


def grid_cell(origin: np.ndarray, epsilon: float, index) -> Box:
    lo = origin + epsilon * np.asarray(index, dtype=float)
    return Box(lo, lo + epsilon)


def mesh_cover(region: Region, epsilon: float) -> list[MeshCell]:
    """Grid cells of side ``epsilon`` that meet ``region``.

    The grid is anchored at the lower corner of the region's bounding box and
    spans that box, so the cells tile a neighbourhood of the region.
    """
    if not epsilon > 0:
        raise InvalidParameterError("mesh size epsilon must be positive")
    bounds = region.bounding_box()
    cells = []
    for index in itertools.product(*(range(k) for k in grid_shape(bounds, epsilon))):
        cell = grid_cell(bounds.lower, epsilon, index)
        if region.cell_intersects(cell.lower, cell.upper):
            cells.append(MeshCell(cell, cell.center, index))
    return cells
