"""Scenario execution: single solves, warm-started parameter sweeps, and the
CSV/JSON outputs consumed by the figure scripts.

Output contract per scenario directory:
  wages.csv         one row per (sweep value, firm)
  fields_<v>.csv    per-node revenue, density, rent and all choice shares
  summary.json      convergence flags, theta0 report, wage box, timing
Zero-noise studies write sigma_trajectory.csv, partition.csv and
verification.json instead of the sweep files.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace as dc_replace
from pathlib import Path

import numpy as np

from .config import ScenarioConfig
from .economy import ModelParams
from .solver import (
    SolverConfig,
    solve_equilibrium,
    uniqueness_threshold,
    wage_bounds,
)
from .telework import (
    TeleFirmSpec,
    solve_tele_equilibrium,
    tele_uniqueness_threshold,
    tele_wage_bounds,
)
from .zeronoise import (
    DEFAULT_SIGMA_LADDER,
    write_partition_csv,
    zero_noise_limit_study,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CHECK = 4


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.10g}"


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _value_tag(v: float) -> str:
    return f"{v:g}"


def _apply_sweep_value(config: ScenarioConfig, value: float):
    """New (firms, params) with the sweep parameter set to ``value``."""
    firms, params = config.firms, config.params
    p = config.sweep.parameter
    if p == "theta":
        params = dc_replace(params, theta=value)
    elif p == "sigma":
        params = dc_replace(params, sigma=value)
    elif p == "w0":
        params = dc_replace(params, w0=value)
    elif p == "B":
        firms = [
            TeleFirmSpec(location=f.location, tech=dc_replace(f.tech, B=value))
            for f in firms
        ]
    return firms, params


def _fields_rows(grid, result, labels):
    coord_names = ["x", "y"][: grid.dimension]
    header = coord_names + ["revenue", "density", "rent"] + [
        f"share_{lab}" for lab in labels
    ]
    shares = np.vstack([f.values for f in result.shares])
    rows = []
    for k in range(grid.node_count):
        row = list(grid.nodes[k]) + [
            result.revenue.values[k],
            result.density.values[k],
            result.rent.values[k],
        ]
        row += list(shares[:, k])
        rows.append(row)
    return header, rows


def _base_wage_rows(param_name, value, firms, result):
    rows = []
    for i, f in enumerate(firms):
        rows.append(
            [
                param_name,
                value,
                i + 1,
                *f.location,
                result.wages[i],
                result.labor_demand[i],
                result.labor_supply[i + 1],
                result.residual_norm,
                result.iterations,
                result.converged,
            ]
        )
    return rows


def _tele_wage_rows(param_name, value, firms, result):
    rows = []
    for i, f in enumerate(firms):
        rows.append(
            [
                param_name,
                value,
                i + 1,
                *f.location,
                result.onsite_wages[i],
                result.remote_wages[i],
                result.onsite_demand[i],
                result.remote_demand[i],
                result.onsite_mass[i],
                result.remote_mass[i],
                result.residual_norm,
                result.iterations,
                result.converged,
            ]
        )
    return rows


@dataclass
class ScenarioOutcome:
    exit_code: int
    summary: dict
    output_dir: Path


def run_scenario(
    config: ScenarioConfig, *, reverse: bool = False, quiet: bool = False
) -> ScenarioOutcome:
    """Execute a scenario and write its outputs; returns the exit status.

    Sweeps run in list order (or reversed with ``reverse``) with each solve
    warm-started from the previous solution. A solver failure does not stop
    the sweep: remaining values still run, partial outputs are kept and the
    failure is flagged in the summary with exit code 3.
    """
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t_start = time.perf_counter()

    if config.mode == "zero-noise-study":
        return _run_zero_noise(config, out, quiet, t_start)

    grid = config.grid
    telework = config.mode == "telework"
    if config.sweep is not None:
        values = list(config.sweep.values)
        param_name = config.sweep.parameter
    else:
        values = [None]
        param_name = "none"
    order = list(reversed(values)) if reverse else values

    coord_names = ["x", "y"][: grid.dimension]
    loc_cols = [f"location_{c}" for c in coord_names]
    if telework:
        wage_header = ["parameter", "value", "firm", *loc_cols,
                       "wage_onsite", "wage_remote", "demand_onsite",
                       "demand_remote", "mass_onsite", "mass_remote",
                       "residual_norm", "iterations", "converged"]
    else:
        wage_header = ["parameter", "value", "firm", *loc_cols,
                       "wage", "labor_demand", "labor_supply",
                       "residual_norm", "iterations", "converged"]

    wage_rows = []
    runs = []
    failures = []
    warm = config.solver.initial_wages

    for value in order:
        if value is not None:
            firms, params = _apply_sweep_value(config, value)
        else:
            firms, params = config.firms, config.params
        cfg = dc_replace(config.solver, initial_wages=warm)
        t0 = time.perf_counter()
        if telework:
            result = solve_tele_equilibrium(firms, params, grid, cfg)
            warm = np.column_stack([result.onsite_wages, result.remote_wages])
        else:
            result = solve_equilibrium(firms, params, grid, cfg)
            warm = result.wages
        elapsed = time.perf_counter() - t0

        tag = _value_tag(value) if value is not None else "solve"
        header, rows = _fields_rows(grid, result, result.option_labels)
        _write_csv(out / f"fields_{tag}.csv", header, rows)
        if telework:
            wage_rows += _tele_wage_rows(param_name, value, firms, result)
        else:
            wage_rows += _base_wage_rows(param_name, value, firms, result)

        run_info = {
            "value": value,
            "converged": bool(result.converged),
            "iterations": int(result.iterations),
            "residual_norm": float(result.residual_norm),
            "runtime_seconds": elapsed,
            "events": list(result.events),
            "trace": list(result.trace),
        }
        if telework:
            run_info["wages_onsite"] = [float(w) for w in result.onsite_wages]
            run_info["wages_remote"] = [
                float(w) if np.isfinite(w) else None for w in result.remote_wages
            ]
            run_info["home_mass"] = float(result.home_mass)
        else:
            run_info["wages"] = [float(w) for w in result.wages]
            run_info["home_mass"] = float(result.labor_supply[0]) if len(
                result.labor_supply
            ) else 1.0
        runs.append(run_info)
        if not result.converged:
            failures.append(
                f"{param_name}={tag}: residual {result.residual_norm:.3e} "
                f"after {result.iterations} iterations"
            )
        if not quiet:
            status = "ok" if result.converged else "FAILED"
            print(
                f"[{config.name}] {param_name}={tag}: {status}, "
                f"residual {result.residual_norm:.3e}, "
                f"{result.iterations} iterations, {elapsed:.2f}s"
            )

    _write_csv(out / "wages.csv", wage_header, wage_rows)

    theta0_report = _theta0_report(config)
    summary = {
        "name": config.name,
        "mode": config.mode,
        "grid": {
            "dimension": grid.dimension,
            "bounds": [list(b) for b in grid.bounds],
            "nodes_per_axis": grid.nodes_per_axis,
        },
        "sweep": {"parameter": param_name, "values": [v for v in order]},
        "theta": config.params.theta,
        **theta0_report,
        "runs": runs,
        "failures": failures,
        "timing_seconds": time.perf_counter() - t_start,
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
    code = EXIT_OK if not failures else EXIT_SOLVER
    return ScenarioOutcome(exit_code=code, summary=summary, output_dir=out)


def _theta0_report(config: ScenarioConfig) -> dict:
    """theta0 and the wage box for the scenario's firms (at base parameters)."""
    if not config.firms:
        return {"theta0": None, "uniqueness_regime": None, "wage_box": None}
    if config.mode == "telework":
        active_B = [f.tech.B for f in config.firms]
        box = tele_wage_bounds(config.firms, config.params, config.grid)
        if any(b <= 0 for b in active_B):
            return {
                "theta0": None,
                "uniqueness_regime": None,
                "wage_box": list(box),
                "theta0_note": "undefined at B = 0 (degenerate profit Hessian)",
            }
        theta0 = tele_uniqueness_threshold(config.firms, config.params, config.grid)
    else:
        theta0 = uniqueness_threshold(config.firms, config.params, config.grid)
        box = wage_bounds(config.firms, config.params, config.grid)
    return {
        "theta0": float(theta0),
        "uniqueness_regime": bool(config.params.theta <= theta0),
        "wage_box": [float(box[0]), float(box[1])],
    }


def _run_zero_noise(config: ScenarioConfig, out: Path, quiet, t_start) -> ScenarioOutcome:
    study = zero_noise_limit_study(
        config.firms,
        config.params,
        config.grid,
        sigma_list=config.sigma_list or DEFAULT_SIGMA_LADDER,
        config=config.solver,
    )
    n = len(config.firms)
    header = ["sigma"] + [f"wage_{i + 1}" for i in range(n)] + [
        "max_increment", "residual_norm", "converged"
    ]
    rows = []
    for k, (s, res) in enumerate(zip(study.sigmas, study.results)):
        inc = study.increments[k - 1] if k > 0 else float("nan")
        rows.append([s, *res.wages, inc, res.residual_norm, res.converged])
    _write_csv(out / "sigma_trajectory.csv", header, rows)
    write_partition_csv(study.verification.partition, out / "partition.csv")
    with open(out / "verification.json", "w") as fh:
        json.dump(study.verification.as_dict(), fh, indent=2)

    theta0_report = _theta0_report(config)
    summary = {
        "name": config.name,
        "mode": config.mode,
        "sigma_list": study.sigmas,
        "theta": config.params.theta,
        **theta0_report,
        "verification_passed": study.verification.passed,
        "failures": study.failures,
        "timing_seconds": time.perf_counter() - t_start,
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
    if not quiet:
        print(
            f"[{config.name}] zero-noise study: verification "
            f"{'passed' if study.verification.passed else 'FAILED'}"
        )
    code = EXIT_OK if not study.failures else EXIT_SOLVER
    return ScenarioOutcome(exit_code=code, summary=summary, output_dir=out)
