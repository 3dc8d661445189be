"""A complete metric on an open subset: d'(x, y) = d(x, y) + |1/d(x, C) - 1/d(y, C)|,
with C the complement of the subset.

The correction term blows up near the boundary, so d'-Cauchy sequences keep a
quantified distance from it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BoundaryPointError
from .geometry import Ball, Box, HalfSpace, Norm, Region, as_vector


@dataclass(frozen=True)
class OpenSubsetMetric:
    base_distance: Callable[[np.ndarray, np.ndarray], float]
    complement_distance: Callable[[np.ndarray], float]
    domain: Region | None = None

    def __call__(self, x, y) -> float:
        return extended_distance(self, x, y)


def extended_distance(m: OpenSubsetMetric, x, y) -> float:
    x, y = as_vector(x), as_vector(y)
    dx, dy = m.complement_distance(x), m.complement_distance(y)
    for p, dist in ((x, dx), (y, dy)):
        if not dist > 0:
            raise BoundaryPointError(f"{p.tolist()} has zero distance to the complement")
    return float(m.base_distance(x, y)) + abs(1.0 / dx - 1.0 / dy)


def _norm_distance(norm: Norm):
    return lambda x, y: float(norm.distance(x, y))


def box_metric(box: Box, norm: Norm = Norm.EUCLIDEAN) -> OpenSubsetMetric:
    """d' on the open box; the distance to the complement is the gap to the nearest face."""

    def to_complement(x):
        return float(max(0.0, np.min(np.minimum(x - box.lower, box.upper - x))))

    return OpenSubsetMetric(_norm_distance(norm), to_complement, box)


def interval_metric(a: float, b: float) -> OpenSubsetMetric:
    return box_metric(Box([a], [b]))


def ball_metric(ball: Ball) -> OpenSubsetMetric:
    """d' on the open ball, in the ball's own norm."""

    def to_complement(x):
        return max(0.0, ball.radius - float(ball.norm(x - ball.center)))

    return OpenSubsetMetric(_norm_distance(ball.norm), to_complement, ball)


def halfspace_metric(normal, offset: float) -> OpenSubsetMetric:
    """d' on the open euclidean half-space ``normal . x > offset``."""
    normal = as_vector(normal)
    unit = normal / np.linalg.norm(normal)
    shift = offset / np.linalg.norm(normal)

    def to_complement(x):
        return max(0.0, float(x @ unit - shift))

    return OpenSubsetMetric(_norm_distance(Norm.EUCLIDEAN), to_complement)


@dataclass
class EscapeReport:
    cauchy: bool
    passed: bool
    tail_start: int
    tail_diameter: float
    min_complement_distance: float
    required_distance: float


def boundary_escape_check(m: OpenSubsetMetric, sequence, bound: float) -> EscapeReport:
    """Quantitative completeness check on a finite sequence.

    The tail is the second half of the sequence. When its d'-diameter is at
    most ``bound`` the tail must stay at distance at least
    ``1 / (1 / d(x0, C) + bound)`` from the complement, ``x0`` being the first
    tail point. A tail of larger diameter is reported as not Cauchy and the
    check passes vacuously.
    """
    pts = [as_vector(p) for p in sequence]
    if not pts:
        return EscapeReport(True, True, 0, 0.0, math.inf, 0.0)
    start = len(pts) // 2 if len(pts) > 1 else 0
    tail = pts[start:]
    diameter = 0.0
    for i in range(len(tail)):
        for j in range(i + 1, len(tail)):
            diameter = max(diameter, extended_distance(m, tail[i], tail[j]))
    gaps = [m.complement_distance(p) for p in tail]
    if min(gaps) <= 0:
        raise BoundaryPointError("sequence reaches the boundary of the domain")
    required = 1.0 / (1.0 / gaps[0] + bound)
    if diameter > bound:
        return EscapeReport(False, True, start, diameter, min(gaps), required)
    return EscapeReport(True, min(gaps) >= required, start, diameter, min(gaps), required)
