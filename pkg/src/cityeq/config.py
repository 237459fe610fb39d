"""Scenario configuration: a single JSON document describing the grid, the
firms, the model parameters, the run mode and an optional parameter sweep.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .economy import CobbDouglas, FirmSpec, ModelParams
from .errors import ConfigError
from .grid import CityGrid, build_grid
from .solver import SolverConfig
from .telework import CES2, TeleFirmSpec

#: theta is capped below its mathematical supremum: R^(theta/(1-theta))
#: becomes numerically meaningless past the largest shipped value.
THETA_CAP = 0.99

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "cityeq scenario configuration",
    "type": "object",
    "required": ["grid", "firms", "params", "mode"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "grid": {
            "type": "object",
            "required": ["dimension", "bounds", "nodes_per_axis"],
            "additionalProperties": False,
            "properties": {
                "dimension": {"enum": [1, 2]},
                "bounds": {
                    "description": "per-axis [lo, hi] pairs (a single pair is "
                    "broadcast to every axis)",
                    "type": "array",
                },
                "nodes_per_axis": {"type": "integer", "minimum": 2},
            },
        },
        "firms": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["location", "tech"],
                "additionalProperties": False,
                "properties": {
                    "location": {
                        "type": "array",
                        "items": {"type": "number"},
                        "minItems": 1,
                        "maxItems": 2,
                    },
                    "tech": {
                        "type": "object",
                        "required": ["kind"],
                        "properties": {
                            "kind": {"enum": ["cobb_douglas", "ces"]},
                            "A": {"type": "number", "exclusiveMinimum": 0},
                            "B": {"type": "number", "minimum": 0},
                            "alpha": {"type": "number"},
                            "beta": {"type": "number"},
                        },
                    },
                },
            },
        },
        "params": {
            "type": "object",
            "required": ["theta", "sigma", "w0"],
            "additionalProperties": False,
            "properties": {
                "theta": {"type": "number", "minimum": 0},
                "sigma": {"type": "number", "minimum": 0},
                "w0": {"type": "number", "exclusiveMinimum": 0},
                "commute_scale": {"type": "number", "minimum": 0},
            },
        },
        "mode": {"enum": ["base", "telework", "zero-noise-study"]},
        "sweep": {
            "type": "object",
            "required": ["parameter", "values"],
            "additionalProperties": False,
            "properties": {
                "parameter": {"enum": ["theta", "B", "sigma", "w0"]},
                "values": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 1,
                },
            },
        },
        "sigma_list": {
            "description": "decreasing noise ladder for zero-noise-study mode",
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0},
            "minItems": 1,
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "residual_tolerance": {"type": "number", "exclusiveMinimum": 0},
                "max_iterations": {"type": "integer", "minimum": 1},
                "trust_radius_init": {"type": "number", "exclusiveMinimum": 0},
                "fd_scale": {"type": "number", "exclusiveMinimum": 0},
                "damping": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            },
        },
        "output_dir": {"type": "string"},
    },
}


@dataclass
class Sweep:
    parameter: str
    values: list[float]


@dataclass
class ScenarioConfig:
    name: str
    grid: CityGrid
    firms: list
    params: ModelParams
    mode: str
    solver: SolverConfig
    output_dir: Path
    sweep: Sweep | None = None
    sigma_list: list[float] = field(default_factory=list)


def config_schema() -> dict:
    return CONFIG_SCHEMA


def _build_firm(raw: dict, mode: str, index: int):
    path = f"firms[{index}]"
    tech = raw["tech"]
    kind = tech["kind"]
    try:
        if mode == "telework":
            if kind != "ces":
                raise ConfigError(
                    "telework mode requires tech.kind = 'ces'", field=path
                )
            return TeleFirmSpec(
                location=tuple(raw["location"]),
                tech=CES2(
                    A=tech["A"], B=tech.get("B", 0.0),
                    alpha=tech["alpha"], beta=tech["beta"],
                ),
            )
        if kind != "cobb_douglas":
            raise ConfigError(
                f"mode '{mode}' requires tech.kind = 'cobb_douglas'", field=path
            )
        return FirmSpec(
            location=tuple(raw["location"]),
            tech=CobbDouglas(A=tech["A"], beta=tech["beta"]),
        )
    except KeyError as exc:
        raise ConfigError(f"missing technology parameter {exc}", field=path) from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), field=path) from exc


def _validate_sweep(sweep: Sweep, mode: str, theta: float):
    vals = sweep.values
    if any(b < a for a, b in zip(vals, vals[1:])):
        raise ConfigError("values must be sorted ascending", field="sweep.values")
    if sweep.parameter == "B" and mode != "telework":
        raise ConfigError(
            "sweeping B requires mode = 'telework'", field="sweep.parameter"
        )
    if sweep.parameter == "theta":
        for v in vals:
            if not 0.0 <= v <= THETA_CAP:
                raise ConfigError(
                    f"theta value {v} outside [0, {THETA_CAP}]", field="sweep.values"
                )
    if sweep.parameter == "sigma" and any(v <= 0 for v in vals):
        raise ConfigError("sigma values must be > 0", field="sweep.values")
    if sweep.parameter == "w0" and any(v <= 0 for v in vals):
        raise ConfigError("w0 values must be > 0", field="sweep.values")
    if sweep.parameter == "B" and any(v < 0 for v in vals):
        raise ConfigError("B values must be >= 0", field="sweep.values")


def parse_config(doc: dict, *, nodes_override: int | None = None,
                 out_override=None) -> ScenarioConfig:
    """Validate a parsed JSON document and build the scenario objects.

    Raises ConfigError with a dotted field path on the first violation.
    """
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = ".".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(e.message, field=where)

    mode = doc["mode"]
    graw = doc["grid"]
    nodes = nodes_override if nodes_override is not None else graw["nodes_per_axis"]
    try:
        grid = build_grid(graw["dimension"], graw["bounds"], nodes)
    except ValueError as exc:
        raise ConfigError(str(exc), field="grid") from exc

    praw = doc["params"]
    theta = float(praw["theta"])
    if theta > THETA_CAP:
        raise ConfigError(
            f"theta = {theta} exceeds the supported maximum {THETA_CAP}",
            field="params.theta",
        )
    sigma = float(praw["sigma"])
    if mode in ("base", "telework") and sigma <= 0:
        raise ConfigError(
            "sigma must be > 0 in base/telework mode (zero-noise-study handles "
            "the sigma -> 0 limit)",
            field="params.sigma",
        )
    try:
        params = ModelParams(
            theta=theta,
            sigma=sigma,
            w0=float(praw["w0"]),
            commute_scale=float(praw.get("commute_scale", 0.5)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), field="params") from exc

    firms = [_build_firm(f, mode, i) for i, f in enumerate(doc["firms"])]
    for i, f in enumerate(firms):
        loc = np.asarray(f.location, dtype=float)
        if loc.shape != (grid.dimension,):
            raise ConfigError(
                f"location has {loc.size} coordinates on a "
                f"{grid.dimension}D grid",
                field=f"firms[{i}].location",
            )
        for c, (lo, hi) in zip(loc, grid.bounds):
            if not lo <= c <= hi:
                raise ConfigError(
                    f"coordinate {c} outside [{lo}, {hi}]",
                    field=f"firms[{i}].location",
                )

    sweep = None
    if "sweep" in doc:
        sweep = Sweep(
            parameter=doc["sweep"]["parameter"],
            values=[float(v) for v in doc["sweep"]["values"]],
        )
        _validate_sweep(sweep, mode, theta)

    sigma_list = [float(s) for s in doc.get("sigma_list", [])]
    if mode == "zero-noise-study":
        if not sigma_list:
            sigma_list = [0.1, 0.05, 0.02, 0.01, 0.005]
        if any(b >= a for a, b in zip(sigma_list, sigma_list[1:])):
            raise ConfigError(
                "sigma_list must be strictly decreasing", field="sigma_list"
            )

    sraw = doc.get("solver", {})
    default_fd = float(np.sqrt(np.finfo(float).eps))
    try:
        solver = SolverConfig(
            residual_tolerance=float(sraw.get("residual_tolerance", 1e-10)),
            max_iterations=int(sraw.get("max_iterations", 200)),
            trust_radius_init=float(sraw.get("trust_radius_init", 1.0)),
            fd_scale=float(sraw.get("fd_scale", default_fd)),
            damping=float(sraw.get("damping", 0.5)),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), field="solver") from exc

    out_dir = Path(out_override) if out_override else Path(doc.get("output_dir", "out"))
    return ScenarioConfig(
        name=doc.get("name", "scenario"),
        grid=grid,
        firms=firms,
        params=params,
        mode=mode,
        solver=solver,
        output_dir=out_dir,
        sweep=sweep,
        sigma_list=sigma_list,
    )


def load_config(path, *, nodes_override=None, out_override=None) -> ScenarioConfig:
    """Read and validate a scenario JSON file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_config(doc, nodes_override=nodes_override, out_override=out_override)
