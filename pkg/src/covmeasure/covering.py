"""Greedy finite versions of the Vitali and Besicovitch covering arguments.

Balls are closed. Two balls count as disjoint when the distance between their
centers exceeds the sum of their radii minus ``DISJOINT_TOL``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .geometry import Ball, Norm, Region, as_points
from .measures import Measure
from .sampling import SeededSampler

DISJOINT_TOL = 1e-12
VITALI_FACTOR = 5.0


@dataclass(frozen=True, eq=False)
class BallFamily:
    centers: np.ndarray
    radii: np.ndarray
    norm: Norm = Norm.EUCLIDEAN
    targets: np.ndarray | None = None

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float).reshape(-1)
        centers = np.asarray(self.centers, dtype=float)
        if centers.size == 0:
            centers = centers.reshape(0, centers.shape[-1] if centers.ndim == 2 else 1)
        elif centers.ndim == 1:
            centers = centers.reshape(len(radii), -1)
        if len(centers) != len(radii):
            raise InvalidParameterError("need one radius per center")
        if np.any(radii < 0) or not np.all(np.isfinite(radii)):
            raise InvalidParameterError("radii must be finite and nonnegative")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "norm", Norm(self.norm))
        if self.targets is not None:
            object.__setattr__(self, "targets", as_points(self.targets, centers.shape[1]))

    @classmethod
    def from_balls(cls, balls, targets=None) -> BallFamily:
        balls = list(balls)
        if not balls:
            return cls(np.empty((0, 1)), np.empty(0), targets=targets)
        norms = {b.norm for b in balls}
        if len(norms) != 1:
            raise InvalidParameterError("balls of a family must share one norm")
        return cls(np.array([b.center for b in balls]), np.array([b.radius for b in balls]), norms.pop(), targets)

    def __len__(self) -> int:
        return len(self.radii)

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def ball(self, i: int) -> Ball:
        return Ball(self.centers[i], self.radii[i], self.norm)

    def order(self, indices=None) -> list[int]:
        """Indices sorted by decreasing radius, ties by index."""
        idx = range(len(self)) if indices is None else indices
        return sorted(idx, key=lambda i: (-self.radii[i], i))

    def disjoint(self, i: int, j: int) -> bool:
        gap = self.norm(self.centers[i] - self.centers[j])
        return bool(gap > self.radii[i] + self.radii[j] - DISJOINT_TOL)

    def covered(self, points, indices, factor: float = 1.0) -> np.ndarray:
        """Mask of points lying in some listed ball, radii scaled by ``factor``."""
        x = as_points(points, self.dim)
        hit = np.zeros(len(x), dtype=bool)
        for i in indices:
            hit |= self.norm(x - self.centers[i]) <= factor * self.radii[i]
        return hit

    def sample_union(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` points of the union, each uniform in a ball picked uniformly."""
        which = rng.integers(0, len(self), size=n)
        unit = self.norm.sample_unit_ball(rng, n, self.dim)
        return self.centers[which] + self.radii[which, None] * unit


@dataclass
class SubfamilyPartition:
    families: list[list[int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.families)


def _first_disjoint(family: BallFamily, chosen: list[int], i: int) -> bool:
    return all(family.disjoint(i, j) for j in chosen)


def vitali_select(family: BallFamily) -> list[int]:
    """Greedy disjoint selection by decreasing radius.

    Every rejected ball meets a selected ball at least as large, so the
    5-fold enlargements of the selection cover the union of the family.
    """
    chosen: list[int] = []
    for i in family.order():
        if _first_disjoint(family, chosen, i):
            chosen.append(i)
    return chosen


def one_ball_per_center(family: BallFamily) -> list[int]:
    """Keep the largest ball (first on ties) for each distinct center."""
    best: dict[bytes, int] = {}
    for i in range(len(family)):
        key = family.centers[i].tobytes()
        j = best.get(key)
        if j is None or family.radii[i] > family.radii[j]:
            best[key] = i
    return sorted(best.values())


def besicovitch_partition(family: BallFamily, *, select_centers: bool = True) -> SubfamilyPartition:
    """Split a centered family into disjoint subfamilies that still cover the centers.

    Balls are processed by decreasing radius and placed first-fit into the
    first subfamily where they are disjoint from every member. With
    ``select_centers`` a ball is skipped when its center already lies in a
    placed ball; this is the Besicovitch selection that keeps the number of
    subfamilies bounded by a constant of the dimension. Without it every
    retained ball is placed (plain first-fit colouring of the overlap graph).
    """
    placed: list[int] = []
    families: list[list[int]] = []
    for i in family.order(one_ball_per_center(family)):
        if select_centers and placed and family.covered(family.centers[i], placed)[0]:
            continue
        for members in families:
            if _first_disjoint(family, members, i):
                members.append(i)
                break
        else:
            families.append([i])
        placed.append(i)
    return SubfamilyPartition(families)


@dataclass
class AlmostCoverResult:
    selected: list[int]
    covered_fraction: float
    std_error: float
    stagnated: bool
    history: list[float]


def measure_almost_cover(family: BallFamily, region: Region, mu: Measure, target_fraction: float,
                         sampler: SeededSampler, n: int = 100_000, min_gain: float = 1e-3) -> AlmostCoverResult:
    """Iteratively extract a disjoint subfamily covering a target share of ``mu`` on ``region``.

    Each round partitions the balls that are still disjoint from the selection
    and adds the subfamily covering the largest estimated share of what is not
    yet covered. The share is estimated on one fixed weighted sample of the
    region. A round gaining less than ``min_gain`` stops with ``stagnated``.
    """
    if not 0 < target_fraction < 1:
        raise InvalidParameterError("target_fraction must lie in (0, 1)")
    bounds = region.bounding_box()
    pts = sampler.uniform(bounds.lower, bounds.upper, n)
    pts = pts[region.contains(pts)]
    if mu.atomic:
        pts = mu.points[region.contains(mu.points)]
        weights = mu.weights[region.contains(mu.points)]
    else:
        weights = mu.density(pts)
    total = weights.sum()
    if total <= 0:
        return AlmostCoverResult([], 0.0, 0.0, True, [0.0])

    selected: list[int] = []
    hit = np.zeros(len(pts), dtype=bool)
    history = [0.0]
    stagnated = False
    while history[-1] < target_fraction:
        candidates = [i for i in range(len(family)) if _first_disjoint(family, selected, i)]
        if not candidates:
            stagnated = True
            break
        sub = BallFamily(family.centers[candidates], family.radii[candidates], family.norm)
        partition = besicovitch_partition(sub, select_centers=False)
        best_gain, best_members = 0.0, []
        for members in partition.families:
            gain = weights[~hit & sub.covered(pts, members)].sum() / total
            if gain > best_gain:
                best_gain, best_members = gain, members
        if best_gain < min_gain:
            stagnated = True
            break
        selected.extend(candidates[m] for m in best_members)
        hit |= family.covered(pts, selected)
        history.append(float(weights[hit].sum() / total))

    frac = history[-1]
    w = weights / total
    # standard error of a self-normalized weighted proportion
    se = float(np.sqrt(np.sum(w**2 * (hit.astype(float) - frac) ** 2))) if len(pts) > 1 else 0.0
    return AlmostCoverResult(sorted(selected), frac, se, stagnated, history)


@dataclass
class PackingResult:
    points: np.ndarray
    norm: Norm

    @property
    def count(self) -> int:
        return len(self.points)

    def min_distance(self) -> float:
        if self.count < 2:
            return float("inf")
        diff = self.points[:, None, :] - self.points[None, :, :]
        dist = self.norm(diff)
        return float(dist[np.triu_indices(self.count, 1)].min())

    def max_radius(self) -> float:
        return float(np.max(self.norm(self.points))) if self.count else 0.0

    def is_valid(self, tol: float = 1e-9) -> bool:
        return self.min_distance() >= 1 - tol and self.max_radius() <= 2 + tol


def _packing_1d() -> np.ndarray:
    # in one dimension the leftmost greedy placement is optimal
    return np.arange(-2.0, 2.0 + 1e-12, 1.0).reshape(-1, 1)


def _feasible(x: np.ndarray, norm: Norm) -> bool:
    return PackingResult(x, norm).is_valid(tol=0.0)


def _repulsion_step(x: np.ndarray, norm: Norm, target: float, radius: float, step: float = 0.5) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    dist = norm(diff)
    np.fill_diagonal(dist, np.inf)
    overlap = np.clip(target - dist, 0.0, None)
    if norm is Norm.EUCLIDEAN:
        direction = diff / np.where(np.isfinite(dist), dist, 1.0)[..., None]
    else:
        # push along the coordinate realizing the sup distance
        axis = np.argmax(np.abs(diff), axis=-1)
        direction = np.zeros_like(diff)
        np.put_along_axis(direction, axis[..., None], np.sign(np.take_along_axis(diff, axis[..., None], -1)), -1)
    x = x + step * np.sum(overlap[..., None] * direction, axis=1)
    r = norm(x)
    far = r > radius
    x[far] *= (radius / r[far])[:, None]
    return x


def estimate_besicovitch_constant(d: int, norm: Norm, budget: int, sampler: SeededSampler,
                                  attempt_steps: int = 200) -> PackingResult:
    """A certified lower bound on the Besicovitch constant of ``(R^d, norm)``.

    Searches for many points in the closed ball of radius 2 with pairwise
    distances at least 1. The search starts from a greedy random insertion and
    then repeatedly tries to fit one more point: a random point is added to
    the best packing and overlaps are relaxed by pairwise repulsion projected
    onto the ball; after ``attempt_steps`` failed steps the attempt restarts
    from the best packing. ``budget`` counts repulsion steps. Steps draw from
    seeds tied to the step index, so a larger budget extends the same run and the count is
    nondecreasing in ``budget``.
    """
    if d < 1 or budget < 1:
        raise InvalidParameterError("need d >= 1 and budget >= 1")
    norm = Norm(norm)
    if d == 1:
        return PackingResult(_packing_1d(), norm)

    stream = sampler.next_stream()
    rng = sampler.generator(stream, 0)
    best = np.zeros((1, d))
    for p in 2.0 * norm.sample_unit_ball(rng, 4000, d):
        if np.all(norm(best - p) >= 1.0):
            best = np.vstack([best, p])

    margin = 1e-6
    current = None
    for t in range(budget):
        if current is None or t % attempt_steps == 0:
            rng = sampler.generator(stream, t + 1)
            current = np.vstack([best, 2.0 * norm.sample_unit_ball(rng, 1, d)])
            current += rng.normal(scale=0.01, size=current.shape)
        current = _repulsion_step(current, norm, 1.0 + margin, 2.0)
        if _feasible(current, norm):
            best = current.copy()
            current = None
    return PackingResult(best, norm)
