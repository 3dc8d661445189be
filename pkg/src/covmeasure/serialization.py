"""JSON encodings of regions, measures, ball families and matrices.

Every object is a dict with a ``kind`` tag; see docs/schema.md.
"""
from __future__ import annotations

import numpy as np

from .covering import BallFamily
from .errors import InvalidParameterError
from .geometry import Ball, Box, HalfSpace, Intersection, Norm, Region
from .linalg import as_matrix
from .measures import AffineDensity, GridDensity, Lebesgue, Measure, WeightedSamples


def _require(obj: dict, *keys):
    missing = [k for k in keys if k not in obj]
    if missing:
        raise InvalidParameterError(f"{obj.get('kind', 'object')} is missing field(s) {missing}")


def region_from_json(obj: dict) -> Region:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvalidParameterError("region must be an object with a 'kind' tag")
    kind = obj["kind"]
    if kind == "box":
        _require(obj, "lower", "upper")
        return Box(obj["lower"], obj["upper"])
    if kind == "ball":
        _require(obj, "center", "radius")
        return Ball(obj["center"], float(obj["radius"]), Norm(obj.get("norm", "euclidean")))
    if kind == "halfspace":
        _require(obj, "normal", "offset", "bounds")
        return HalfSpace(obj["normal"], float(obj["offset"]), region_from_json({"kind": "box", **obj["bounds"]}))
    if kind == "intersection":
        _require(obj, "parts")
        return Intersection(tuple(region_from_json(p) for p in obj["parts"]))
    raise InvalidParameterError(f"unknown region kind {kind!r}")


def region_to_json(region: Region) -> dict:
    if isinstance(region, Box):
        return {"kind": "box", "lower": region.lower.tolist(), "upper": region.upper.tolist()}
    if isinstance(region, Ball):
        return {"kind": "ball", "center": region.center.tolist(), "radius": region.radius, "norm": region.norm.value}
    if isinstance(region, HalfSpace):
        b = region.bounds
        return {"kind": "halfspace", "normal": region.normal.tolist(), "offset": region.offset,
                "bounds": {"lower": b.lower.tolist(), "upper": b.upper.tolist()}}
    if isinstance(region, Intersection):
        return {"kind": "intersection", "parts": [region_to_json(p) for p in region.parts]}
    raise InvalidParameterError(f"{type(region).__name__} has no JSON form")


def measure_from_json(obj: dict) -> Measure:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvalidParameterError("measure must be an object with a 'kind' tag")
    kind = obj["kind"]
    if kind == "lebesgue":
        _require(obj, "dim")
        return Lebesgue(int(obj["dim"]), float(obj.get("scale", 1.0)))
    if kind == "affine_density":
        _require(obj, "coeffs")
        support = obj.get("support")
        return AffineDensity(obj["coeffs"], float(obj.get("constant", 0.0)),
                             None if support is None else Box(support["lower"], support["upper"]))
    if kind == "grid_density":
        _require(obj, "lower", "upper", "values")
        grid = GridDensity(Box(obj["lower"], obj["upper"]), np.asarray(obj["values"], dtype=float))
        if "cell_size" in obj and not np.allclose(grid.cell_size, obj["cell_size"]):
            raise InvalidParameterError("cell_size disagrees with the box and the value array")
        return grid
    if kind == "weighted_samples":
        _require(obj, "points", "weights")
        return WeightedSamples(obj["points"], obj["weights"])
    raise InvalidParameterError(f"unknown measure kind {kind!r}")


def measure_to_json(mu: Measure) -> dict:
    if isinstance(mu, Lebesgue):
        return {"kind": "lebesgue", "dim": mu.dim, "scale": mu.scale}
    if isinstance(mu, AffineDensity):
        out = {"kind": "affine_density", "coeffs": mu.coeffs.tolist(), "constant": mu.constant}
        if mu.support is not None:
            out["support"] = {"lower": mu.support.lower.tolist(), "upper": mu.support.upper.tolist()}
        return out
    if isinstance(mu, GridDensity):
        return {"kind": "grid_density", "lower": mu.box.lower.tolist(), "upper": mu.box.upper.tolist(),
                "values": mu.values.tolist(), "cell_size": mu.cell_size.tolist()}
    if isinstance(mu, WeightedSamples):
        return {"kind": "weighted_samples", "points": mu.points.tolist(), "weights": mu.weights.tolist()}
    raise InvalidParameterError(f"{type(mu).__name__} has no JSON form")


def family_from_json(obj) -> BallFamily:
    """Accepts a bare array of ``{center, radius}`` or ``{"norm": ..., "balls": [...]}``."""
    norm = Norm.EUCLIDEAN
    if isinstance(obj, dict):
        norm = Norm(obj.get("norm", "euclidean"))
        balls = obj.get("balls", [])
    else:
        balls = obj
    if not isinstance(balls, list):
        raise InvalidParameterError("ball family must be a JSON array")
    if not balls:
        return BallFamily(np.empty((0, 1)), np.empty(0), norm)
    try:
        centers = [np.atleast_1d(np.asarray(b["center"], dtype=float)) for b in balls]
        radii = [float(b["radius"]) for b in balls]
    except (KeyError, TypeError) as exc:
        raise InvalidParameterError(f"each ball needs 'center' and 'radius': {exc}") from exc
    if len({c.size for c in centers}) != 1:
        raise InvalidParameterError("ball centers differ in dimension")
    return BallFamily(np.array(centers), np.array(radii), norm)


def family_to_json(family: BallFamily) -> dict:
    return {"norm": family.norm.value,
            "balls": [{"center": c.tolist(), "radius": float(r)} for c, r in zip(family.centers, family.radii)]}


def matrix_from_json(obj) -> np.ndarray:
    return as_matrix(obj)


def matrix_to_json(m) -> list:
    return np.asarray(m, dtype=float).tolist()
