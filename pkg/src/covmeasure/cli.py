"""Command-line front end.

Exit codes: 0 on success, 2 on invalid input, 1 on runtime failure. Reports
carry the effective configuration and the seed and contain no timestamps, so a
repeated command line reproduces the report byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .change_of_variables import (INTEGRANDS, CoVConfig, cov_lhs, cov_rhs, gaussian_demo, image_measure_bounds,
                                  image_measure_estimate)
from .covering import (VITALI_FACTOR, besicovitch_partition, estimate_besicovitch_constant, measure_almost_cover,
                       vitali_select)
from .differentiation import DEFAULT_SCHEDULE, MeasurePair, VitaliFamilyKind, lebesgue_density, rn_derivative_at
from .errors import InvalidParameterError
from .geometry import Norm
from .linalg import determinant, transvection_decompose
from .maps import resolve_map
from .measures import Lebesgue
from .sampling import SeededSampler
from .serialization import family_from_json, matrix_from_json, measure_from_json, region_from_json

log = logging.getLogger("covmeasure")

COMMANDS = ("decompose", "cover", "besicovitch-constant", "density", "rn-deriv", "cov-integrate", "image-bounds",
            "gaussian-demo")

DEFAULTS = {
    "seed": 0,
    "samples": 100_000,
    "epsilon": 0.1,
    "delta": 0.01,
    "budget": 10_000,
    "format": None,
    "mode": "vitali",
    "dim": 2,
    "norm": "euclidean",
    "map": "identity",
    "integrand": "one",
    "workers": 1,
}
COMMAND_DEFAULTS = {
    "gaussian-demo": {"samples": 1_000_000},
    "cov-integrate": {"samples": 1_000_000},
}
CSV_COMMANDS = {"density", "rn-deriv"}


class InputError(Exception):
    """Bad command-line input; maps to exit code 2."""


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="root seed of every random stream")
    common.add_argument("--samples", type=int, help="Monte Carlo sample count")
    common.add_argument("--epsilon", type=float, help="mesh size")
    common.add_argument("--delta", type=float, help="linearization slack")
    common.add_argument("--matrix", help="square matrix as a JSON row-major array")
    common.add_argument("--input", help="JSON input file")
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--budget", type=int, help="search budget (repulsion steps)")
    common.add_argument("--mode", choices=("vitali", "besicovitch", "almost"))
    common.add_argument("--config", help="optional JSON file of defaults; flags take precedence")
    common.add_argument("--dim", type=int, help="dimension")
    common.add_argument("--norm", choices=[n.value for n in Norm])
    common.add_argument("--map", help="identity | linear:<json> | shear | polar | cubic-shear")
    common.add_argument("--region", help="region as JSON (kind-tagged)")
    common.add_argument("--integrand", choices=sorted(INTEGRANDS))
    common.add_argument("--grid", action="store_true", default=None, help="grid-mode image membership")
    common.add_argument("--workers", type=int, help="worker threads; results do not depend on it")

    parser = argparse.ArgumentParser(prog="covmeasure", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)
    helps = {
        "decompose": "transvection decomposition of a matrix",
        "cover": "Vitali selection, Besicovitch partition or measure almost-cover of a ball family",
        "besicovitch-constant": "packing lower bound on the Besicovitch constant",
        "density": "Lebesgue density of a region at a point over shrinking radii",
        "rn-deriv": "ratios rho(B)/mu(B) over shrinking balls",
        "cov-integrate": "both sides of the change-of-variables identity",
        "image-bounds": "mesh-linearization bounds on the measure of an image",
        "gaussian-demo": "Gaussian integral via polar coordinates",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _read_json_file(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _parse_json_flag(text: str, flag: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{flag} is not valid JSON: {exc}") from exc


def effective_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    cfg.update(COMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        loaded = _read_json_file(args.config)
        if not isinstance(loaded, dict):
            raise InputError("config file must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for key, value in vars(args).items():
        if key not in ("command", "config") and value is not None:
            cfg[key] = value
    if cfg["format"] is None:
        cfg["format"] = "csv" if args.command in CSV_COMMANDS else "json"
    cfg["command"] = args.command
    return cfg


def _input(cfg: dict, required: bool = True):
    if cfg.get("input"):
        return _read_json_file(cfg["input"])
    if required:
        raise InputError(f"{cfg['command']} needs --input")
    return None


def _cov_config(cfg: dict) -> CoVConfig:
    return CoVConfig(epsilon=cfg["epsilon"], delta=cfg["delta"], n_samples=cfg["samples"], seed=cfg["seed"],
                     workers=cfg["workers"])


def _sampler(cfg: dict) -> SeededSampler:
    return SeededSampler(cfg["seed"], workers=cfg["workers"])


def cmd_decompose(cfg: dict) -> dict:
    if cfg.get("matrix"):
        m = matrix_from_json(_parse_json_flag(cfg["matrix"], "--matrix"))
    else:
        data = _input(cfg)
        m = matrix_from_json(data["matrix"] if isinstance(data, dict) else data)
    dec = transvection_decompose(m)
    out = dec.to_dict()
    out["determinant"] = determinant(m)
    out["reconstruction_error"] = float(np.linalg.norm(dec.reconstruct() - m))
    return out


def cmd_cover(cfg: dict) -> dict:
    data = _input(cfg)
    mode = cfg["mode"]
    if mode == "almost":
        if not isinstance(data, dict):
            raise InputError("almost-cover input must be an object with family, region and target")
        family = family_from_json(data["family"])
        region = region_from_json(data["region"])
        mu = measure_from_json(data["measure"]) if "measure" in data else Lebesgue(region.dim)
        res = measure_almost_cover(family, region, mu, float(data.get("target", 0.9)), _sampler(cfg), cfg["samples"])
        return {"selected": res.selected, "covered_fraction": res.covered_fraction, "std_error": res.std_error,
                "stagnated": res.stagnated, "history": res.history}
    family = family_from_json(data)
    if mode == "vitali":
        return {"selected": vitali_select(family), "enlargement_factor": VITALI_FACTOR}
    select = data.get("select_centers", True) if isinstance(data, dict) else True
    partition = besicovitch_partition(family, select_centers=select)
    return {"families": partition.families, "family_count": len(partition)}


def cmd_besicovitch_constant(cfg: dict) -> dict:
    res = estimate_besicovitch_constant(cfg["dim"], Norm(cfg["norm"]), cfg["budget"], _sampler(cfg))
    return {"count": res.count, "points": res.points.tolist(), "norm": res.norm.value,
            "min_distance": res.min_distance(), "max_radius": res.max_radius(), "valid": res.is_valid()}


def cmd_density(cfg: dict) -> list[tuple]:
    data = _input(cfg)
    region = region_from_json(data["region"])
    est = lebesgue_density(region, data["point"], tuple(data.get("radii", DEFAULT_SCHEDULE)), _sampler(cfg),
                           cfg["samples"], Norm(data.get("norm", cfg["norm"])))
    return [(e.radius, e.density, e.std_error) for e in est]


def cmd_rn_deriv(cfg: dict) -> list[tuple]:
    data = _input(cfg)
    pair = MeasurePair(measure_from_json(data["rho"]), measure_from_json(data["mu"]))
    res = rn_derivative_at(pair, data["point"], tuple(data.get("radii", DEFAULT_SCHEDULE)),
                           VitaliFamilyKind(data.get("kind", "centered_balls")), _sampler(cfg), cfg["samples"],
                           Norm(data.get("norm", cfg["norm"])))
    return res.rows() + [(0.0, res.extrapolated, float("nan"))]


def _map_and_region(cfg: dict):
    data = _input(cfg, required=False) or {}
    f = resolve_map(data.get("map", cfg["map"]))
    if cfg.get("region"):
        region_obj = _parse_json_flag(cfg["region"], "--region")
    elif "region" in data:
        region_obj = data["region"]
    else:
        raise InputError("a region is needed (--region or an input file with 'region')")
    region = region_from_json(region_obj)
    if region.dim != f.dim:
        raise InputError(f"region dimension {region.dim} does not match map dimension {f.dim}")
    return f, region, data


def cmd_cov_integrate(cfg: dict) -> dict:
    f, region, data = _map_and_region(cfg)
    g = INTEGRANDS[data.get("integrand", cfg["integrand"])]
    cov = _cov_config(cfg)
    lhs = cov_lhs(f, region, g, cov, grid=bool(cfg.get("grid")))
    rhs = cov_rhs(f, region, g, cov)
    sigma = math.hypot(lhs.std_error, rhs.std_error)
    return {"lhs": {"value": lhs.value, "std_error": lhs.std_error},
            "rhs": {"value": rhs.value, "std_error": rhs.std_error},
            "difference_in_sigmas": (lhs.value - rhs.value) / sigma if sigma > 0 else 0.0}


def cmd_image_bounds(cfg: dict) -> dict:
    f, region, _ = _map_and_region(cfg)
    cov = _cov_config(cfg)
    bounds = image_measure_bounds(f, region, cov)
    out = bounds.report()
    if f.inverse is not None:
        est = image_measure_estimate(f, region, cov)
        out["independent_estimate"] = {"value": est.value, "std_error": est.std_error}
    return out


def cmd_gaussian_demo(cfg: dict) -> dict:
    res = gaussian_demo(_cov_config(cfg))
    return {"I_squared": res.I_squared, "I": res.I, "std_error_I_squared": res.std_error_I_squared,
            "std_error_I": res.std_error_I, "truncation_error": res.truncation_error,
            "value": res.I, "std_error": res.std_error_I}


HANDLERS = {
    "decompose": cmd_decompose,
    "cover": cmd_cover,
    "besicovitch-constant": cmd_besicovitch_constant,
    "density": cmd_density,
    "rn-deriv": cmd_rn_deriv,
    "cov-integrate": cmd_cov_integrate,
    "image-bounds": cmd_image_bounds,
    "gaussian-demo": cmd_gaussian_demo,
}


def render(cfg: dict, results) -> str:
    config = {k: v for k, v in cfg.items() if k != "output"}
    if cfg["format"] == "csv":
        if not isinstance(results, list):
            raise InputError(f"{cfg['command']} has no CSV form")
        buf = io.StringIO()
        buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["r", "value", "std_error"])
        writer.writerows([repr(float(v)) for v in row] for row in results)
        return buf.getvalue()
    if isinstance(results, list):
        results = [{"r": r, "value": v, "std_error": se} for r, v, se in results]
    report = {"command": cfg["command"], "config": config, "seed": cfg["seed"], "results": results}
    return json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = effective_config(args)
        text = render(cfg, HANDLERS[args.command](cfg))
    except (InputError, InvalidParameterError, KeyError, TypeError, ValueError) as exc:
        print(f"covmeasure {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        log.debug("runtime failure", exc_info=True)
        print(f"covmeasure {args.command}: error: {exc}", file=sys.stderr)
        return 1
    if cfg.get("output"):
        try:
            Path(cfg["output"]).write_text(text)
        except OSError as exc:
            print(f"covmeasure: cannot write {cfg['output']}: {exc.strerror or exc}", file=sys.stderr)
            return 2
    else:
        stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())
