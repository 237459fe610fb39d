"""Zero-noise model: hard max revenue, assignment cells per option, interval
market-clearing verification, and the vanishing-noise continuation study.

With sigma = 0 the share fields collapse to indicators of the cells where an
option is optimal; market clearing becomes an inclusion between labor demand
and the (strict, weak) cell masses. Candidate wages (typically the limit of
regularized solutions) are verified rather than solved for directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import economy as econ
from .economy import ModelParams
from .errors import NumericInputError
from .grid import CityGrid, Field
from .solver import EquilibriumResult, SolverConfig, solve_equilibrium


def hard_revenue(x, wages, params: ModelParams, firms) -> float:
    """Best net value over home and all firms at one location."""
    return float(np.max(econ.net_values(x, wages, params, firms)))


def hard_revenue_field(grid: CityGrid, wages, params: ModelParams, firms) -> Field:
    values = econ.value_matrix(grid, wages, params, firms)
    return Field(grid, np.max(values, axis=0))


def zero_noise_density(grid, wages, params, firms) -> Field:
    """Residential density induced by the hard (sigma = 0) revenue."""
    return econ.density_from_revenue(
        hard_revenue_field(grid, wages, params, firms), params.theta
    )


@dataclass
class Partition:
    """Per-node optimal option sets and the induced cell masses.

    ``optimal`` is an (N+1, K) boolean matrix (option 0 = home); a node is
    strict when exactly one option is optimal within the tie tolerance.
    Masses integrate the zero-noise density over the weak cells V_i and the
    strict cells V_i^s.
    """

    grid: CityGrid
    tie_tolerance: float
    optimal: np.ndarray
    strict: np.ndarray
    best_option: np.ndarray
    density: Field
    mass_weak: np.ndarray
    mass_strict: np.ndarray

    @property
    def option_count(self) -> int:
        return self.optimal.shape[0]

    def intervals(self, option: int) -> list[tuple[float, float]]:
        """Maximal runs of consecutive nodes belonging to V_option (1D only)."""
        if self.grid.dimension != 1:
            raise NumericInputError("interval listing is defined for 1D grids only")
        xs = self.grid.nodes[:, 0]
        mask = self.optimal[option]
        out = []
        start = None
        for k, inside in enumerate(mask):
            if inside and start is None:
                start = xs[k]
            elif not inside and start is not None:
                out.append((float(start), float(xs[k - 1])))
                start = None
        if start is not None:
            out.append((float(start), float(xs[-1])))
        return out


def build_partition(
    wages, params: ModelParams, firms, grid: CityGrid, tie_tolerance: float | None = None
) -> Partition:
    """Classify every node by its optimal option set.

    An option is optimal at a node when its net value is within
    ``tie_tolerance`` of the nodal maximum (default 1e-9 times the wage
    scale: exact ties almost never land on grid nodes).
    """
    wages = np.atleast_1d(np.asarray(wages, dtype=float))
    if tie_tolerance is None:
        scale = max(params.w0, float(np.max(wages)) if wages.size else 0.0)
        tie_tolerance = 1e-9 * scale
    if tie_tolerance < 0:
        raise NumericInputError("tie_tolerance must be >= 0")
    values = econ.value_matrix(grid, wages, params, firms)
    top = np.max(values, axis=0)
    optimal = values >= top - tie_tolerance
    n_opt = optimal.sum(axis=0)
    strict = n_opt == 1
    best = np.where(strict, np.argmax(values, axis=0), -1)
    density = econ.density_from_revenue(Field(grid, top), params.theta)
    weighted = grid.quad_weights * density.values
    mass_weak = optimal @ weighted
    mass_strict = (optimal & strict[None, :]) @ weighted
    return Partition(
        grid=grid,
        tie_tolerance=float(tie_tolerance),
        optimal=optimal,
        strict=strict,
        best_option=best,
        density=density,
        mass_weak=mass_weak,
        mass_strict=mass_strict,
    )


def write_partition_csv(partition: Partition, path) -> None:
    """Node coordinates, optimal option id (-1 for ties) and strict flag."""
    grid = partition.grid
    coord_names = ["x", "y"][: grid.dimension]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(coord_names + ["option", "strict"]) + "\n")
        for k in range(grid.node_count):
            coords = [f"{c:.10g}" for c in grid.nodes[k]]
            fh.write(
                ",".join(
                    coords
                    + [str(int(partition.best_option[k])), str(int(partition.strict[k]))]
                )
                + "\n"
            )


def _boundary_measure(partition: Partition, option: int) -> float:
    """Estimate of the boundary size of V_option on the grid.

    1D: the number of in/out interfaces (a count). 2D: the number of
    4-neighbor interfaces times the spacing (a length).
    """
    grid = partition.grid
    mask = partition.optimal[option]
    if grid.dimension == 1:
        return float(np.sum(mask[1:] != mask[:-1]))
    n = grid.nodes_per_axis
    m2 = mask.reshape(n, n)  # axis 0 fastest -> rows are y, cols are x
    h = grid.spacing[0]
    ix = np.sum(m2[:, 1:] != m2[:, :-1])
    iy = np.sum(m2[1:, :] != m2[:-1, :])
    return float((ix + iy) * h)


@dataclass
class OptionCheck:
    option: int
    label: str
    demand: float
    mass_strict: float
    mass_weak: float
    slack: float
    margin_low: float
    margin_high: float
    passed: bool


@dataclass
class ZeroNoiseReport:
    checks: list[OptionCheck]
    partition: Partition
    density_mass_error: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "density_mass_error": self.density_mass_error,
            "tie_tolerance": self.partition.tie_tolerance,
            "checks": [
                {
                    "option": c.option,
                    "label": c.label,
                    "demand": c.demand,
                    "mass_strict": c.mass_strict,
                    "mass_weak": c.mass_weak,
                    "slack": c.slack,
                    "margin_low": c.margin_low,
                    "margin_high": c.margin_high,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }


def verify_zero_noise_equilibrium(
    wages, params: ModelParams, firms, grid: CityGrid, tie_tolerance: float | None = None
) -> ZeroNoiseReport:
    """Check the interval market-clearing conditions at candidate wages.

    For each firm the demand must lie between the strict and weak cell
    masses up to a quadrature slack of 2h * (cell boundary estimate) * max mu;
    the home option must absorb exactly the workers no firm hires.
    """
    wages = np.atleast_1d(np.asarray(wages, dtype=float))
    partition = build_partition(wages, params, firms, grid, tie_tolerance)
    h = max(grid.spacing)
    mu_max = float(np.max(partition.density.values))
    demands = np.array(
        [econ.labor_demand(f.tech, w) for f, w in zip(firms, wages)]
    )
    targets = np.concatenate([[1.0 - demands.sum()], demands])
    labels = ["home"] + [f"firm_{i}" for i in range(1, len(firms) + 1)]
    checks = []
    for i in range(len(firms) + 1):
        slack = 2.0 * h * _boundary_measure(partition, i) * mu_max
        lo = partition.mass_strict[i] - slack
        hi = partition.mass_weak[i] + slack
        margin_low = targets[i] - lo
        margin_high = hi - targets[i]
        checks.append(
            OptionCheck(
                option=i,
                label=labels[i],
                demand=float(targets[i]),
                mass_strict=float(partition.mass_strict[i]),
                mass_weak=float(partition.mass_weak[i]),
                slack=float(slack),
                margin_low=float(margin_low),
                margin_high=float(margin_high),
                passed=bool(margin_low >= 0 and margin_high >= 0),
            )
        )
    weighted_mass = float(np.dot(grid.quad_weights, partition.density.values))
    density_mass_error = abs(weighted_mass - 1.0)
    return ZeroNoiseReport(
        checks=checks,
        partition=partition,
        density_mass_error=density_mass_error,
        passed=all(c.passed for c in checks),
    )


DEFAULT_SIGMA_LADDER = (0.1, 0.05, 0.02, 0.01, 0.005)


@dataclass
class LimitStudy:
    sigmas: list[float]
    results: list[EquilibriumResult]
    wage_table: np.ndarray
    increments: list[float]
    verification: ZeroNoiseReport
    failures: list[str] = field(default_factory=list)


def zero_noise_limit_study(
    firms,
    params: ModelParams,
    grid: CityGrid,
    sigma_list=DEFAULT_SIGMA_LADDER,
    config: SolverConfig | None = None,
) -> LimitStudy:
    """Solve the smoothed model along a decreasing noise ladder with warm
    starts and verify the smallest-noise wages against the zero-noise
    interval conditions.
    """
    sigmas = [float(s) for s in sigma_list]
    if not sigmas or any(s <= 0 for s in sigmas):
        raise NumericInputError("sigma_list must be positive")
    if any(b >= a for a, b in zip(sigmas, sigmas[1:])):
        raise NumericInputError("sigma_list must be strictly decreasing")
    config = config or SolverConfig()
    results = []
    failures = []
    warm = config.initial_wages
    for s in sigmas:
        p = ModelParams(
            theta=params.theta, sigma=s, w0=params.w0, commute_scale=params.commute_scale
        )
        cfg = SolverConfig(
            residual_tolerance=config.residual_tolerance,
            max_iterations=config.max_iterations,
            fd_scale=config.fd_scale,
            initial_wages=warm,
            trust_radius_init=config.trust_radius_init,
        )
        res = solve_equilibrium(firms, p, grid, cfg)
        results.append(res)
        if not res.converged:
            failures.append(
                f"sigma={s:g}: solver stopped at residual {res.residual_norm:.3e}"
            )
        warm = res.wages
    table = np.vstack([r.wages for r in results]) if firms else np.zeros((len(sigmas), 0))
    increments = [
        float(np.max(np.abs(table[k + 1] - table[k]))) for k in range(len(sigmas) - 1)
    ]
    zero_params = ModelParams(
        theta=params.theta, sigma=0.0, w0=params.w0, commute_scale=params.commute_scale
    )
    verification = verify_zero_noise_equilibrium(
        results[-1].wages, zero_params, firms, grid
    )
    return LimitStudy(
        sigmas=sigmas,
        results=results,
        wage_table=table,
        increments=increments,
        verification=verification,
        failures=failures,
    )
