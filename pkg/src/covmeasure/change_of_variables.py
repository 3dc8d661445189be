"""Both sides of the change-of-variables identity, mesh-linearization bounds on
image measures, the integrability companion check and the Gaussian integral.

All estimates are Monte Carlo over uniform points and bit-reproducible for a
fixed :class:`CoVConfig`.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .errors import EvaluationError, InvalidParameterError, MissingInverseError
from .geometry import Box, Region, box_volume, grid_cell, grid_shape, mesh_cover
from .maps import DifferentiableMap, polar_map
from .sampling import Estimate, RunningStats, SeededSampler, box_mean

Integrand = Callable[[np.ndarray], np.ndarray]

# fixed stream ids so that the two sides of the identity draw independent points
RHS_STREAM = 1 << 20
LHS_STREAM = 2 << 20
PROBE_STREAM = 3 << 20

IMAGE_BOUNDARY_SAMPLES = 1000
IMAGE_INFLATION = 0.10
PROBES_PER_CELL = 8
DIVERGENCE_CAP = 1e6


@dataclass(frozen=True)
class CoVConfig:
    epsilon: float = 0.1
    delta: float = 0.01
    n_samples: int = 1_000_000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidParameterError("epsilon must be positive")
        if not self.delta > 0:
            raise InvalidParameterError("delta must be positive")
        if self.n_samples < 1:
            raise InvalidParameterError("n_samples must be at least 1")

    def sampler(self, stream: int) -> SeededSampler:
        return SeededSampler(self.seed, stream, workers=self.workers)

    def to_dict(self) -> dict:
        return asdict(self)


def one(y: np.ndarray) -> np.ndarray:
    return np.ones(len(y))


def gaussian(y: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * np.sum(y * y, axis=1))


def norm_squared(y: np.ndarray) -> np.ndarray:
    return np.sum(y * y, axis=1)


def inverse_square(y: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 1.0 / np.sum(y * y, axis=1)


INTEGRANDS: dict[str, Integrand] = {
    "one": one,
    "gaussian": gaussian,
    "norm-squared": norm_squared,
    "inverse-square": inverse_square,
}


def _rhs_integrand(f: DifferentiableMap, s: Region, g: Integrand, absolute: bool = False):
    def h(x):
        out = np.zeros(len(x))
        inside = s.contains(x)
        if np.any(inside):
            xs = x[inside]
            jac_det = np.abs(np.linalg.det(f.jacobians(xs)))
            gv = g(f(xs))
            out[inside] = jac_det * (np.abs(gv) if absolute else gv)
        return out

    return h


def cov_rhs(f: DifferentiableMap, s: Region, g: Integrand, cfg: CoVConfig) -> Estimate:
    """Estimate of the pulled-back integral: ``int_s |det f'(x)| g(f(x)) dx``."""
    bounds = s.bounding_box()
    vol = box_volume(bounds)
    if vol == 0.0:
        return Estimate(0.0, 0.0)
    stats = box_mean(cfg.sampler(RHS_STREAM), bounds.lower, bounds.upper, cfg.n_samples, _rhs_integrand(f, s, g))
    return Estimate(vol * stats.mean, vol * stats.std_error)


def image_bounding_box(f: DifferentiableMap, s: Region, sampler: SeededSampler) -> Box:
    """Box around ``f(s)`` from images of corners, boundary points and interior points of s's bounding box, inflated by 10%."""
    bounds = s.bounding_box()
    rng = sampler.rng()
    probes = [
        bounds.corners(),
        bounds.sample_boundary(rng, IMAGE_BOUNDARY_SAMPLES),
        bounds.lower + rng.random((IMAGE_BOUNDARY_SAMPLES, bounds.dim)) * bounds.widths,
    ]
    image = f(np.concatenate(probes))
    lo, hi = image.min(axis=0), image.max(axis=0)
    pad = 0.5 * IMAGE_INFLATION * (hi - lo) + 1e-12
    return Box(lo - pad, hi + pad)


class _LinearizedInverse:
    """Numerical inverse seeded by the pushforward of mesh cells.

    A point ``y`` is matched to the cells whose image centers are nearest, the
    local linear inverse gives a first preimage guess and Newton steps refine it.
    """

    def __init__(self, f: DifferentiableMap, s: Region, epsilon: float, neighbours: int = 4, newton_steps: int = 6):
        cells = mesh_cover(s, epsilon)
        if not cells:
            raise InvalidParameterError("region has an empty mesh cover")
        self.f = f
        self.centers = np.array([c.center for c in cells])
        self.images = f(self.centers)
        self.inv_jac = np.linalg.pinv(f.jacobians(self.centers))
        self.tree = cKDTree(self.images)
        self.k = min(neighbours, len(cells))
        self.steps = newton_steps

    def __call__(self, y: np.ndarray) -> np.ndarray:
        _, idx = self.tree.query(y, k=self.k)
        idx = np.asarray(idx).reshape(len(y), self.k)
        best = np.full(y.shape, np.nan)
        best_res = np.full(len(y), np.inf)
        for col in range(self.k):
            i = idx[:, col]
            x = self.centers[i] + np.einsum("nij,nj->ni", self.inv_jac[i], y - self.images[i])
            with np.errstate(all="ignore"):
                for _ in range(self.steps):
                    live = np.all(np.isfinite(x), axis=1)
                    try:
                        resid = self.f(x[live]) - y[live]
                        step = np.einsum("nij,nj->ni", np.linalg.pinv(self.f.jacobians(x[live])), resid)
                    except (np.linalg.LinAlgError, EvaluationError):
                        break
                    x[live] -= step
                res = np.linalg.norm(np.asarray(self.f.forward(x)) - y, axis=1)
            better = np.isfinite(res) & (res < best_res)
            best[better] = x[better]
            best_res[better] = res[better]
        tol = 1e-9 * (1.0 + np.linalg.norm(y, axis=1))
        best[~(best_res <= tol)] = np.nan
        return best


def _lhs_setup(f: DifferentiableMap, s: Region, cfg: CoVConfig, grid: bool):
    if f.inverse is not None:
        pullback = f.pullback
    elif grid:
        pullback = _LinearizedInverse(f, s, cfg.epsilon)
    else:
        raise MissingInverseError(f"map {f.name!r} has no inverse; enable grid mode")
    sampler = cfg.sampler(LHS_STREAM)
    return image_bounding_box(f, s, sampler), pullback, sampler


def _lhs_integrand(s: Region, g: Integrand, pullback, absolute: bool = False):
    def h(y):
        x = pullback(y)
        ok = np.all(np.isfinite(x), axis=1)
        inside = np.zeros(len(y), dtype=bool)
        inside[ok] = s.contains(x[ok])
        out = np.zeros(len(y))
        if np.any(inside):
            gv = g(y[inside])
            out[inside] = np.abs(gv) if absolute else gv
        return out

    return h


def cov_lhs(f: DifferentiableMap, s: Region, g: Integrand, cfg: CoVConfig, *, grid: bool = False) -> Estimate:
    """Estimate of ``int_{f(s)} g(y) dy`` by uniform sampling of a box around ``f(s)``.

    Membership ``y in f(s)`` is decided by ``inverse(y) in s``; in grid mode a
    mesh-seeded Newton inverse stands in for a missing analytic inverse.
    """
    image_box, pullback, sampler = _lhs_setup(f, s, cfg, grid)
    vol = box_volume(image_box)
    stats = box_mean(sampler, image_box.lower, image_box.upper, cfg.n_samples, _lhs_integrand(s, g, pullback))
    return Estimate(vol * stats.mean, vol * stats.std_error)


@dataclass
class LinearizedCell:
    box: Box
    center: np.ndarray
    jacobian: np.ndarray
    det_abs: float
    meets: bool
    inside: bool


@dataclass
class ImageBounds:
    lower: float
    upper: float
    certified: bool
    offending: list[tuple[int, ...]]
    cells: list[LinearizedCell] = field(repr=False, default_factory=list)

    def brackets(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def report(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "certified": self.certified,
            "offending_cells": [list(i) for i in self.offending],
            "cells_total": len(self.cells),
            "cells_meeting": sum(c.meets for c in self.cells),
            "cells_inside": sum(c.inside for c in self.cells),
        }


def image_measure_bounds(f: DifferentiableMap, K: Region, cfg: CoVConfig) -> ImageBounds:
    """Lower and upper bounds on ``Leb(f(K))`` from a linearization on an epsilon-mesh.

    Every mesh cell gets ``A_i = Df(c_i)`` at its center ``c_i`` and a slack
    ``s_i = max(delta, t_i)``, where ``t_i`` is the measured inflation needed for
    ``f(B_i) - f(c_i)`` to sit inside ``(1 + t_i) A_i (B_i - c_i)`` (probed at the
    cell corners and 8 random points). The upper bound sums
    ``(1 + s_i)^(d + 1) |det A_i| vol`` over cells meeting ``K``; the lower bound
    sums ``|det A_i| vol / (1 + s_i)^(d + 1)`` over cells inside ``K``.

    The bounds are certified when every probe satisfies
    ``|f(y) - f(c_i) - A_i (y - c_i)| <= delta * epsilon``, i.e. when the
    configured delta alone suffices.
    """
    eps, delta = cfg.epsilon, cfg.delta
    bounds = K.bounding_box()
    d = bounds.dim
    shape = grid_shape(bounds, eps)
    meets, inside = [], set()
    for index in itertools.product(*(range(k) for k in shape)):
        cell = grid_cell(bounds.lower, eps, index)
        if K.cell_intersects(cell.lower, cell.upper):
            meets.append(index)
            if K.cell_inside(cell.lower, cell.upper):
                inside.add(index)
    if not meets:
        return ImageBounds(0.0, 0.0, True, [])

    boxes = [grid_cell(bounds.lower, eps, idx) for idx in meets]
    centers = np.array([b.center for b in boxes])
    jac = f.jacobians(centers)
    dets = np.abs(np.linalg.det(jac))
    cells = [LinearizedCell(b, centers[k], jac[k], float(dets[k]), True, idx in inside)
             for k, (idx, b) in enumerate(zip(meets, boxes))]

    rng = cfg.sampler(PROBE_STREAM).rng()
    unit_corners = np.array(list(itertools.product((0.0, 1.0), repeat=d)))
    offending = []
    upper = lower = 0.0
    for idx, c in zip(meets, cells):
        y = c.box.lower + np.vstack([unit_corners, rng.random((PROBES_PER_CELL, d))]) * eps
        step = f(y) - f(c.center[None, :])
        err = np.linalg.norm(step - (y - c.center) @ c.jacobian.T, axis=1)
        if np.any(err > delta * eps):
            offending.append(idx)
        if c.det_abs > 0:
            local = np.linalg.solve(c.jacobian, step.T).T - (y - c.center)
            slack = max(delta, float(np.max(np.abs(local))) / (eps / 2))
        else:
            slack = math.inf
            if idx not in offending:
                offending.append(idx)
        factor = (1.0 + slack) ** (d + 1)
        if math.isinf(slack):
            upper = math.inf
        else:
            upper += factor * c.det_abs
            if c.inside:
                lower += c.det_abs / factor
    vol = eps**d
    return ImageBounds(lower * vol, upper * vol, not offending, offending, cells)


def image_measure_estimate(f: DifferentiableMap, K: Region, cfg: CoVConfig) -> Estimate:
    """Independent estimate of ``Leb(f(K))`` by inverse membership on a box around ``f(K)``."""
    return cov_lhs(f, K, one, cfg)


@dataclass
class Companion:
    lhs_abs: float
    rhs_abs: float
    lhs_std_error: float
    rhs_std_error: float
    lhs_divergent: bool
    rhs_divergent: bool
    agree: bool


def tail_index(values: np.ndarray, k: int | None = None) -> float:
    """Hill estimate of the tail index of the positive values (infinite for bounded tails)."""
    v = np.sort(values[values > 0])[::-1]
    if k is None:
        k = max(50, len(v) // 1000)
    if len(v) <= k:
        return math.inf
    logs = np.log(v[:k]) - math.log(v[k])
    total = float(logs.sum())
    return math.inf if total == 0.0 else k / total


def _divergence_profile(draw_stats, n: int, cap: float) -> tuple[RunningStats, bool]:
    """Run ``draw_stats`` at n, 2n and 4n samples and classify the integral.

    Divergent when the estimate exceeds ``cap`` after both doublings while
    growing by more than half at each, or when the Hill tail index of the
    largest sample at ``4n`` is at most ``1 + 3 / sqrt(k)`` (infinite mean).
    """
    runs = [draw_stats(n * 2**j) for j in range(3)]
    means = [stats.mean for stats, _ in runs]
    growth = all(b > 1.5 * a > 0 for a, b in zip(means, means[1:]))
    blown = means[-1] > cap and growth
    values = runs[-1][1]
    k = max(50, len(values[values > 0]) // 1000)
    heavy = tail_index(values, k) <= 1.0 + 3.0 / math.sqrt(k)
    return runs[0][0], blown or heavy


def integrability_companion(f: DifferentiableMap, s: Region, g: Integrand, cfg: CoVConfig,
                            cap: float = DIVERGENCE_CAP, *, grid: bool = False) -> Companion:
    """Compare ``int_{f(s)} |g|`` with ``int_s |det f'| |g o f|``.

    The two agree when both are finite and equal within 3 combined standard
    errors, or when both are classified as divergent.
    """
    s_box = s.bounding_box()
    image_box, pullback, _ = _lhs_setup(f, s, cfg, grid)
    rhs_h = _rhs_integrand(f, s, g, absolute=True)
    lhs_h = _lhs_integrand(s, g, pullback, absolute=True)

    def sided(h, box: Box, stream: int):
        vol = box_volume(box)

        def draw_stats(n):
            sampler = cfg.sampler(stream)
            chunks = sampler.map_chunks(n, lambda rng, size: vol * h(box.lower + rng.random((size, box.dim)) * box.widths))
            values = np.concatenate(chunks)
            return RunningStats.of(values), values

        return draw_stats

    rhs_stats, rhs_div = _divergence_profile(sided(rhs_h, s_box, RHS_STREAM), cfg.n_samples, cap)
    lhs_stats, lhs_div = _divergence_profile(sided(lhs_h, image_box, LHS_STREAM), cfg.n_samples, cap)
    lhs = math.inf if lhs_div else lhs_stats.mean
    rhs = math.inf if rhs_div else rhs_stats.mean
    if lhs_div or rhs_div:
        agree = lhs_div and rhs_div
    else:
        agree = abs(lhs - rhs) <= 3.0 * math.hypot(lhs_stats.std_error, rhs_stats.std_error)
    return Companion(lhs, rhs, lhs_stats.std_error, rhs_stats.std_error, lhs_div, rhs_div, agree)


@dataclass
class GaussianDemo:
    I_squared: float
    I: float
    std_error_I_squared: float
    std_error_I: float
    truncation_error: float


def gaussian_demo(cfg: CoVConfig, radius: float = 8.0) -> GaussianDemo:
    """``I^2 = int_{R^2} exp(-(x^2 + y^2)/2)`` through polar coordinates on ``(0, R) x (-pi, pi)``."""
    s = Box([0.0, -math.pi], [radius, math.pi])
    est = cov_rhs(polar_map(), s, gaussian, cfg)
    root = math.sqrt(max(est.value, 0.0))
    se_root = est.std_error / (2 * root) if root > 0 else math.inf
    return GaussianDemo(est.value, root, est.std_error, se_root, 2 * math.pi * math.exp(-radius**2 / 2))
