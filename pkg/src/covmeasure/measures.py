"""Measures on R^d and Monte Carlo estimation of their mass on regions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParameterError
from .geometry import Box, Norm, Region, as_points, as_vector, box_volume
from .sampling import Estimate, SeededSampler, box_mean


class Measure:
    """Base class. Absolutely continuous measures expose ``density``."""

    dim: int

    def density(self, points) -> np.ndarray:
        raise NotImplementedError

    @property
    def atomic(self) -> bool:
        return False


@dataclass(frozen=True)
class Lebesgue(Measure):
    """A scaled Lebesgue measure; every additive Haar measure on R^d has this form."""

    dim: int
    scale: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidParameterError("dimension must be at least 1")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise InvalidParameterError("Lebesgue scale must be positive and finite")

    def density(self, points) -> np.ndarray:
        return np.full(len(as_points(points, self.dim)), float(self.scale))

    def ball_mass(self, center, radius: float, norm: Norm) -> float:
        return self.scale * norm.unit_ball_volume(self.dim) * radius**self.dim


@dataclass(frozen=True)
class DensityMeasure(Measure):
    """A measure with a vectorized density function ``(n, d) -> (n,)``."""

    dim: int
    func: Callable[[np.ndarray], np.ndarray]

    def density(self, points) -> np.ndarray:
        return np.asarray(self.func(as_points(points, self.dim)), dtype=float).reshape(-1)


@dataclass(frozen=True, eq=False)
class AffineDensity(Measure):
    """Density ``constant + coeffs . x``, optionally restricted to a support box.

    This is the JSON-serializable analytic density.
    """

    coeffs: np.ndarray
    constant: float = 0.0
    support: Box | None = None

    def __post_init__(self):
        object.__setattr__(self, "coeffs", as_vector(self.coeffs, "coefficients"))
        if self.support is not None and self.support.dim != self.coeffs.size:
            raise InvalidParameterError("support box dimension does not match the coefficients")

    @property
    def dim(self) -> int:
        return self.coeffs.size

    def density(self, points) -> np.ndarray:
        x = as_points(points, self.dim)
        values = self.constant + x @ self.coeffs
        if self.support is not None:
            values = np.where(self.support.contains(x), values, 0.0)
        if np.any(values < -1e-12):
            raise InvalidParameterError("affine density is negative on a queried point")
        return np.maximum(values, 0.0)


@dataclass(frozen=True, eq=False)
class GridDensity(Measure):
    """Piecewise-constant density on a box; each cell carries a nonnegative value."""

    box: Box
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != self.box.dim:
            raise InvalidParameterError("grid array rank must equal the box dimension")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise InvalidParameterError("grid cell values must be finite and nonnegative")
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def cell_size(self) -> np.ndarray:
        return self.box.widths / np.array(self.values.shape)

    def density(self, points) -> np.ndarray:
        x = as_points(points, self.dim)
        shape = np.array(self.values.shape)
        idx = np.floor((x - self.box.lower) / self.cell_size).astype(int)
        # the closed upper face belongs to the last cell
        idx = np.where(x == self.box.upper, shape - 1, idx)
        inside = np.all((idx >= 0) & (idx < shape), axis=1)
        out = np.zeros(len(x))
        if np.any(inside):
            out[inside] = self.values[tuple(idx[inside].T)]
        return out

    def box_mass(self, b: Box) -> float:
        """Exact mass of an axis-aligned box (grid quadrature)."""
        total = self.values
        for axis in range(self.dim):
            edges = self.box.lower[axis] + self.cell_size[axis] * np.arange(self.values.shape[axis] + 1)
            overlap = np.clip(np.minimum(edges[1:], b.upper[axis]) - np.maximum(edges[:-1], b.lower[axis]), 0, None)
            total = np.tensordot(overlap, total, axes=([0], [0]))
        return float(total)

    @property
    def total_mass(self) -> float:
        return float(self.values.sum() * np.prod(self.cell_size))


@dataclass(frozen=True, eq=False)
class WeightedSamples(Measure):
    """A finite atomic measure: point masses with nonnegative weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(pts) != len(w):
            raise InvalidParameterError("need one weight per sample point")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InvalidParameterError("weights must be finite and nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def atomic(self) -> bool:
        return True

    def mass(self, region: Region) -> float:
        if len(self.points) == 0:
            return 0.0
        return float(self.weights[region.contains(self.points)].sum())

    def ball_mass(self, center, radius: float, norm: Norm) -> float:
        if len(self.points) == 0:
            return 0.0
        return float(self.weights[norm(self.points - np.asarray(center)) <= radius].sum())


def mc_measure(region: Region, mu: Measure, sampler: SeededSampler, n: int) -> Estimate:
    """Unbiased estimate of ``mu(region)`` with its standard error.

    Points are uniform in the region's bounding box and weighted by the density
    of ``mu``. Atomic measures are summed exactly.
    """
    if n < 1:
        raise InvalidParameterError("sample count must be at least 1")
    if mu.atomic:
        return Estimate(mu.mass(region), 0.0)
    bounds = region.bounding_box()
    vol = box_volume(bounds)
    if vol == 0.0:
        return Estimate(0.0, 0.0)

    def integrand(x):
        return np.where(region.contains(x), mu.density(x), 0.0)

    stats = box_mean(sampler, bounds.lower, bounds.upper, n, integrand)
    return Estimate(vol * stats.mean, vol * stats.std_error)
