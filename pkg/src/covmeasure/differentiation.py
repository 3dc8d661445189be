"""Differentiation of measures along shrinking balls, and Lebesgue density.

Ball averages use antithetic pairs ``x + r*u`` and ``x - r*u``: averages of
affine densities over centered balls come out exact, and standard errors are
computed from the pair means.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, UndefinedRatioError
from .geometry import Norm, Region, as_vector
from .measures import Measure
from .sampling import SeededSampler

DEFAULT_SCHEDULE = (0.2, 0.1, 0.05, 0.025)


class VitaliFamilyKind(str, enum.Enum):
    CENTERED_BALLS = "centered_balls"
    CONTAINING_BALLS = "containing_balls"


@dataclass(frozen=True)
class RadiusSchedule:
    radii: tuple[float, ...]

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if not radii:
            raise InvalidParameterError("radius schedule is empty")
        if radii[-1] <= 0:
            raise InvalidParameterError("radii must be positive")
        if any(b >= a for a, b in zip(radii, radii[1:])):
            raise InvalidParameterError("radius schedule must be strictly decreasing")
        object.__setattr__(self, "radii", radii)

    def __iter__(self):
        return iter(self.radii)

    def __len__(self) -> int:
        return len(self.radii)


@dataclass(frozen=True)
class MeasurePair:
    rho: Measure
    mu: Measure

    def __post_init__(self):
        if self.rho.dim != self.mu.dim:
            raise InvalidParameterError("rho and mu live in different dimensions")

    @property
    def dim(self) -> int:
        return self.mu.dim


def _ball_values(measure: Measure, center: np.ndarray, r: float, norm: Norm, pts: np.ndarray) -> np.ndarray:
    """Per-point values whose mean times ``vol(B(center, r))`` is the measure of the ball."""
    if measure.atomic:
        vol = norm.unit_ball_volume(center.size) * r**center.size
        return np.full(len(pts), measure.ball_mass(center, r, norm) / vol)
    return measure.density(pts)


def _pair_means(sampler: SeededSampler, n: int, d: int, norm: Norm, values) -> list[np.ndarray]:
    """Antithetic pair means of each function in ``values`` over unit-ball offsets."""
    pairs = max(1, n // 2)

    def work(rng, size):
        u = norm.sample_unit_ball(rng, size, d)
        return [0.5 * (f(u) + f(-u)) for f in values]

    chunks = sampler.map_chunks(pairs, work)
    return [np.concatenate([c[k] for c in chunks]) for k in range(len(values))]


def _ratio(num: np.ndarray, den: np.ndarray, r: float) -> tuple[float, float]:
    mean_den = float(den.mean())
    if mean_den <= 0:
        raise UndefinedRatioError(r)
    ratio = float(num.mean()) / mean_den
    if len(num) < 2:
        return ratio, 0.0
    resid = num - ratio * den
    return ratio, float(resid.std(ddof=1) / math.sqrt(len(num)) / mean_den)


def extrapolate_to_zero(radii, values, last: int = 3) -> float:
    """Intercept at ``r = 0`` of the least-squares line through the last points."""
    r = np.asarray(radii, dtype=float)[-last:]
    y = np.asarray(values, dtype=float)[-last:]
    if len(r) == 1:
        return float(y[0])
    rc, yc = r - r.mean(), y - y.mean()
    slope = float(rc @ yc) / float(rc @ rc)
    return float(y.mean() - slope * r.mean())


@dataclass
class RNDerivative:
    radii: list[float]
    ratios: list[float]
    std_errors: list[float]
    extrapolated: float

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.radii, self.ratios, self.std_errors))


def rn_derivative_at(pair: MeasurePair, x, schedule: RadiusSchedule | tuple = DEFAULT_SCHEDULE,
                     kind: VitaliFamilyKind = VitaliFamilyKind.CENTERED_BALLS, sampler: SeededSampler | None = None,
                     n: int = 100_000, norm: Norm = Norm.EUCLIDEAN) -> RNDerivative:
    """Ratios ``rho(B) / mu(B)`` over shrinking balls at ``x`` and their limit.

    ``centered_balls`` uses ``B(x, r)``. ``containing_balls`` uses a ball of
    radius ``r`` whose center is offset from ``x`` by a seeded random vector
    of norm at most ``r / 2``, so ``x`` stays well inside.
    """
    x = as_vector(x)
    if x.size != pair.dim:
        raise InvalidParameterError("point dimension does not match the measures")
    schedule = schedule if isinstance(schedule, RadiusSchedule) else RadiusSchedule(tuple(schedule))
    kind = VitaliFamilyKind(kind)
    sampler = sampler or SeededSampler(0)
    norm = Norm(norm)
    d = x.size
    offsets = sampler.rng()
    ratios, errors = [], []
    for r in schedule:
        center = x
        if kind is VitaliFamilyKind.CONTAINING_BALLS:
            center = x + 0.5 * r * norm.sample_unit_ball(offsets, 1, d)[0]
        num, den = _pair_means(sampler, n, d, norm, [
            lambda u, c=center, r=r: _ball_values(pair.rho, c, r, norm, c + r * u),
            lambda u, c=center, r=r: _ball_values(pair.mu, c, r, norm, c + r * u),
        ])
        ratio, se = _ratio(num, den, r)
        ratios.append(ratio)
        errors.append(se)
    return RNDerivative(list(schedule.radii), ratios, errors, extrapolate_to_zero(schedule.radii, ratios))


@dataclass
class DensityEstimate:
    radius: float
    density: float
    raw: float
    std_error: float


def lebesgue_density(region: Region, x, schedule: RadiusSchedule | tuple = DEFAULT_SCHEDULE,
                     sampler: SeededSampler | None = None, n: int = 100_000,
                     norm: Norm = Norm.EUCLIDEAN) -> list[DensityEstimate]:
    """``Leb(region & B(x, r)) / Leb(B(x, r))`` per scheduled radius, clamped to [0, 1]."""
    x = as_vector(x)
    if x.size != region.dim:
        raise InvalidParameterError("point dimension does not match the region")
    schedule = schedule if isinstance(schedule, RadiusSchedule) else RadiusSchedule(tuple(schedule))
    sampler = sampler or SeededSampler(0)
    norm = Norm(norm)
    out = []
    for r in schedule:
        (hits,) = _pair_means(sampler, n, x.size, norm,
                              [lambda u, r=r: region.contains(x + r * u).astype(float)])
        raw = float(hits.mean())
        se = float(hits.std(ddof=1) / math.sqrt(len(hits))) if len(hits) > 1 else 0.0
        out.append(DensityEstimate(r, min(1.0, max(0.0, raw)), raw, se))
    return out


def doubling_ratios(mu: Measure, x, radii, sampler: SeededSampler | None = None, n: int = 100_000,
                    norm: Norm = Norm.EUCLIDEAN) -> list[float]:
    """``mu(B(x, 2r)) / mu(B(x, r))`` for each radius."""
    x = as_vector(x)
    sampler = sampler or SeededSampler(0)
    norm = Norm(norm)
    scale = 2.0**x.size
    out = []
    for r in radii:
        r = float(r)
        if r <= 0:
            raise InvalidParameterError("radii must be positive")
        big, small = _pair_means(sampler, n, x.size, norm, [
            lambda u, r=r: _ball_values(mu, x, 2 * r, norm, x + 2 * r * u),
            lambda u, r=r: _ball_values(mu, x, r, norm, x + r * u),
        ])
        if small.mean() <= 0:
            raise UndefinedRatioError(r)
        out.append(scale * float(big.mean()) / float(small.mean()))
    return out


def doubling_ratio(mu: Measure, x, radii, sampler: SeededSampler | None = None, n: int = 100_000,
                   norm: Norm = Norm.EUCLIDEAN) -> float:
    """Empirical doubling constant: the largest ratio over the tested radii."""
    return max(doubling_ratios(mu, x, radii, sampler, n, norm))
