"""Equilibrium wage system: residual assembly, hybrid and fixed-point solvers,
uniqueness threshold and coupling diagnostics.

The unknowns are the N firm wages. The residual couples each firm's labor
demand to the Gibbs labor supply integrated against the endogenous
residential density. Internally the root finder works on log-wages, which
keeps iterates positive without projections; all reported quantities are in
wage levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import economy as econ
from .economy import FirmSpec, ModelParams
from .errors import InvalidWageError, NumericInputError
from .grid import CityGrid, Field
from .hybrid import RootResult, forward_jacobian, hybrid_root


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the nonlinear solve; defaults match the shipped scenarios."""

    residual_tolerance: float = 1e-10
    max_iterations: int = 200
    fd_scale: float = float(np.sqrt(np.finfo(float).eps))
    initial_wages: np.ndarray | None = None
    trust_radius_init: float = 1.0
    damping: float = 0.5  # fixed-point path only

    def __post_init__(self):
        if not self.residual_tolerance > 0:
            raise NumericInputError("residual_tolerance must be > 0")
        if self.max_iterations < 1:
            raise NumericInputError("max_iterations must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise NumericInputError("damping must be in (0, 1]")


@dataclass
class EquilibriumResult:
    """Converged (or best-effort) state of the wage system.

    ``labor_supply`` has N+1 entries, home first; shares are one Field per
    option in the same order. ``trace`` is the JSON-ready iteration log of
    the root finder.
    """

    wages: np.ndarray
    revenue: Field
    density: Field
    rent: Field
    shares: list[Field]
    labor_supply: np.ndarray
    labor_demand: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    wage_box: tuple[float, float]
    method: str
    trace: list[dict] = field(default_factory=list)
    events: list[str] = field(default_factory=list)
    firms: tuple = ()
    params: ModelParams | None = None
    option_labels: list[str] = field(default_factory=list)


def wage_bounds(firms, params: ModelParams, grid: CityGrid) -> tuple[float, float]:
    """Analytic box [w_lo, w_hi] containing every equilibrium wage vector.

    w_hi = 2*max_i||c_i||_inf + sum_i pi_i(w0) + sigma*log(N+1) + w0, and
    w_lo is where the smallest of the (decreasing) profit functions crosses
    w_hi, so any wage with pi_i(w) <= w_hi lies above w_lo.
    """
    costs = econ.commute_cost_matrix(grid, firms, params)
    m = float(np.max(costs)) if len(firms) else 0.0
    total_profit = sum(econ.profit(f.tech, params.w0) for f in firms)
    n_opts = len(firms) + 1
    w_hi = 2.0 * m + total_profit + params.sigma * math.log(n_opts) + params.w0
    if not firms:
        return params.w0, w_hi
    w_lo = min(econ.inverse_profit(f.tech, w_hi) for f in firms)
    return float(w_lo), float(w_hi)


def _state(wages, firms, params, grid, costs=None):
    """Full nodal state at a wage vector: values, revenue, density, shares,
    supplies and the residual."""
    values = econ.value_matrix(grid, wages, params, firms, costs=costs)
    shares = econ.share_values(values, params.sigma)
    revenue = Field(grid, econ.softmax_values(values, params.sigma))
    density = econ.density_from_revenue(revenue, params.theta)
    weighted = grid.quad_weights * density.values
    supply = shares @ weighted  # N+1, home first
    demand = np.array([econ.labor_demand(f.tech, w) for f, w in zip(firms, wages)])
    residual = -demand + supply[1:]
    return {
        "values": values,
        "shares": shares,
        "revenue": revenue,
        "density": density,
        "supply": supply,
        "demand": demand,
        "residual": residual,
    }


def assemble_residual(wages, firms, params: ModelParams, grid: CityGrid) -> np.ndarray:
    """Residual G_i(w) = -L_i(w_i) + integral of share_i against mu_w.

    A root of G is an equilibrium: labor demand equals Gibbs labor supply
    under the density induced by the smoothed revenue of w itself.
    """
    wages = np.atleast_1d(np.asarray(wages, dtype=float))
    if len(wages) != len(firms):
        raise NumericInputError(
            f"{len(wages)} wages for {len(firms)} firms"
        )
    if np.any(wages <= 0) or np.any(~np.isfinite(wages)):
        raise InvalidWageError(f"wages must be positive, got {wages!r}")
    return _state(wages, firms, params, grid)["residual"]


def residual_jacobian_fd(wages, firms, params, grid, fd_scale=None):
    """Forward-difference Jacobian of the residual in the wage parameterization."""
    if fd_scale is None:
        fd_scale = float(np.sqrt(np.finfo(float).eps))
    costs = econ.commute_cost_matrix(grid, firms, params)
    w = np.asarray(wages, dtype=float)
    f0 = _state(w, firms, params, grid, costs)["residual"]
    return forward_jacobian(
        lambda z: _state(z, firms, params, grid, costs)["residual"], w, f0, fd_scale
    )


def _option_labels(n_firms: int) -> list[str]:
    return ["home"] + [f"firm_{i}" for i in range(1, n_firms + 1)]


def _build_result(wages, firms, params, grid, costs, root: RootResult, method, events):
    st = _state(wages, firms, params, grid, costs)
    rent = econ.rent_from_density(st["revenue"], st["density"], params.theta)
    share_fields = [Field(grid, st["shares"][i]) for i in range(len(firms) + 1)]
    return EquilibriumResult(
        wages=wages,
        revenue=st["revenue"],
        density=st["density"],
        rent=rent,
        shares=share_fields,
        labor_supply=st["supply"],
        labor_demand=st["demand"],
        residual_norm=float(np.max(np.abs(st["residual"]))) if len(firms) else 0.0,
        iterations=root.iterations,
        converged=root.success,
        wage_box=wage_bounds(firms, params, grid),
        method=method,
        trace=root.trace,
        events=events,
        firms=tuple(firms),
        params=params,
        option_labels=_option_labels(len(firms)),
    )


def solve_equilibrium(
    firms,
    params: ModelParams,
    grid: CityGrid,
    config: SolverConfig | None = None,
) -> EquilibriumResult:
    """Solve the N-equation wage system with the dogleg/Broyden hybrid.

    Returns a result whose ``converged`` flag certifies the residual
    max-norm is within tolerance; on failure the result carries the best
    iterate and the full residual history in ``trace``.
    """
    config = config or SolverConfig()
    econ._check_sigma(params.sigma)
    costs = econ.commute_cost_matrix(grid, firms, params)
    n = len(firms)
    events: list[str] = []

    if n == 0:
        empty = RootResult(np.zeros(0), np.zeros(0), 0.0, 0, True, "no firms")
        return _build_result(np.zeros(0), firms, params, grid, costs, empty, "hybrid", events)

    w_lo, w_hi = wage_bounds(firms, params, grid)
    if config.initial_wages is not None:
        w_init = np.asarray(config.initial_wages, dtype=float)
        if w_init.shape != (n,) or np.any(w_init <= 0):
            raise InvalidWageError(f"initial_wages must be {n} positive reals")
    else:
        w_init = np.full(n, params.w0)

    u_floor = math.log(w_lo / 2.0)
    u_ceil = math.log(w_hi) + 10.0  # generous: exp stays finite

    def project(u):
        clipped = np.clip(u, u_floor, u_ceil)
        if np.any(clipped != u):
            events.append(
                "wage iterate clamped to the admissible range "
                f"[{math.exp(u_floor):.6g}, {math.exp(u_ceil):.6g}]"
            )
        return clipped

    def residual_log(u):
        return _state(np.exp(u), firms, params, grid, costs)["residual"]

    root = hybrid_root(
        residual_log,
        np.log(w_init),
        tol=config.residual_tolerance,
        max_iter=config.max_iterations,
        fd_scale=config.fd_scale,
        trust_radius=config.trust_radius_init,
        project=project,
    )
    return _build_result(np.exp(root.x), firms, params, grid, costs, root, "hybrid", events)


def _fixed_density_gradient(wages, firms, params, grid, costs, mu_weighted):
    """Gradient of J_mu(w) = sum_i pi_i(w_i) + int R_sigma dmu for fixed mu."""
    values = np.empty((len(firms) + 1, grid.node_count))
    values[0] = params.w0
    values[1:] = wages[:, None] - costs
    shares = econ.share_values(values, params.sigma)
    supply = shares[1:] @ mu_weighted
    demand = np.array([econ.labor_demand(f.tech, w) for f, w in zip(firms, wages)])
    return -demand + supply, shares


def _fixed_density_objective(wages, firms, params, grid, costs, mu_weighted):
    values = np.empty((len(firms) + 1, grid.node_count))
    values[0] = params.w0
    values[1:] = wages[:, None] - costs
    rev = econ.softmax_values(values, params.sigma)
    return sum(econ.profit(f.tech, w) for f, w in zip(firms, wages)) + float(
        rev @ mu_weighted
    )


def minimize_fixed_density(
    firms, params, grid, costs, mu_weighted, w_start, w_box, tol=1e-13, max_iter=100
):
    """Minimizer of the strictly convex J_mu over wages, for a fixed density.

    Safeguarded Newton on the gradient (the Hessian is pi'' on the diagonal
    plus the positive-semidefinite share covariance term); falls back to
    per-coordinate bisection on the monotone gradient if Newton stalls.
    """
    w = w_start.copy()
    w_lo, w_hi = w_box
    n = len(firms)
    for _ in range(max_iter):
        g, shares = _fixed_density_gradient(wages=w, firms=firms, params=params,
                                            grid=grid, costs=costs,
                                            mu_weighted=mu_weighted)
        if np.max(np.abs(g)) <= tol:
            return w, True
        s = shares[1:]
        sbar = s @ mu_weighted
        hess = np.diag(
            [econ.profit_curvature(f.tech, wi) for f, wi in zip(firms, w)]
        )
        hess += (np.diag(sbar) - (s * mu_weighted) @ s.T) / params.sigma
        try:
            step = np.linalg.solve(hess, -g)
        except np.linalg.LinAlgError:
            break
        # backtrack into positivity and descent
        j0 = _fixed_density_objective(w, firms, params, grid, costs, mu_weighted)
        t = 1.0
        for _ in range(60):
            w_new = w + t * step
            if np.all(w_new > 0):
                j1 = _fixed_density_objective(
                    w_new, firms, params, grid, costs, mu_weighted
                )
                if j1 <= j0:
                    break
            t *= 0.5
        else:
            break
        w = w_new
    else:
        g, _ = _fixed_density_gradient(w, firms, params, grid, costs, mu_weighted)
        if np.max(np.abs(g)) <= tol:
            return w, True

    # bisection fallback: each coordinate gradient is increasing in its wage
    for _ in range(200):
        w_prev = w.copy()
        for i in range(n):
            def gi(wi):
                z = w.copy()
                z[i] = wi
                return _fixed_density_gradient(
                    z, firms, params, grid, costs, mu_weighted
                )[0][i]
            lo, hi = w_lo / 4.0, 4.0 * w_hi
            if gi(lo) > 0 or gi(hi) < 0:  # no sign change: keep current
                continue
            w[i] = brentq(gi, lo, hi, xtol=1e-14)
        if np.max(np.abs(w - w_prev)) < 1e-13:
            break
    g, _ = _fixed_density_gradient(w, firms, params, grid, costs, mu_weighted)
    return w, bool(np.max(np.abs(g)) <= 1e4 * tol)


def fixed_density_objective(wages, firms, params, grid, density: Field):
    """J_mu(w): total profit plus expected smoothed revenue under mu."""
    costs = econ.commute_cost_matrix(grid, firms, params)
    mu_weighted = grid.quad_weights * density.values
    return _fixed_density_objective(
        np.asarray(wages, dtype=float), firms, params, grid, costs, mu_weighted
    )


def solve_by_fixed_point(
    firms,
    params: ModelParams,
    grid: CityGrid,
    config: SolverConfig | None = None,
) -> EquilibriumResult:
    """Damped fixed-point iteration on w -> argmin J_{mu_w}.

    Each outer step recomputes the density induced by the current wages and
    solves the strictly convex inner problem exactly; the outer update is
    damped. Stops as soon as the inner solution satisfies the full
    equilibrium system, or when successive wage iterates stall.
    """
    config = config or SolverConfig()
    econ._check_sigma(params.sigma)
    costs = econ.commute_cost_matrix(grid, firms, params)
    n = len(firms)
    events: list[str] = []
    if n == 0:
        empty = RootResult(np.zeros(0), np.zeros(0), 0.0, 0, True, "no firms")
        return _build_result(np.zeros(0), firms, params, grid, costs, empty, "fixed-point", events)

    box = wage_bounds(firms, params, grid)
    w = (
        np.asarray(config.initial_wages, dtype=float)
        if config.initial_wages is not None
        else np.full(n, params.w0)
    )
    tau = config.damping
    trace: list[dict] = []
    best = None

    for it in range(1, config.max_iterations + 1):
        st = _state(w, firms, params, grid, costs)
        mu_weighted = grid.quad_weights * st["density"].values
        w_star, inner_ok = minimize_fixed_density(
            firms, params, grid, costs, mu_weighted, w, box
        )
        if not inner_ok:
            events.append(f"inner minimization fell back to bisection at iteration {it}")
        res_at_star = _state(w_star, firms, params, grid, costs)["residual"]
        norm_star = float(np.max(np.abs(res_at_star)))
        move = float(np.max(np.abs(w_star - w)))
        trace.append(
            {
                "iteration": it,
                "residual_max_norm": norm_star,
                "wage_update_max": move,
                "step_type": "fixed-point",
            }
        )
        if best is None or norm_star < best[1]:
            best = (w_star.copy(), norm_star, it)
        if norm_star <= config.residual_tolerance:
            root = RootResult(w_star, res_at_star, norm_star, it, True, "converged", trace)
            return _build_result(w_star, firms, params, grid, costs, root, "fixed-point", events)
        w = (1.0 - tau) * w + tau * w_star
        if move < config.residual_tolerance:
            break

    w_best, norm_best, it_best = best
    success = norm_best <= config.residual_tolerance
    root = RootResult(
        w_best,
        np.zeros(n),
        norm_best,
        len(trace),
        success,
        "converged" if success else "fixed-point iteration did not converge",
        trace,
    )
    return _build_result(w_best, firms, params, grid, costs, root, "fixed-point", events)


def _golden_minimize(f, lo, hi, tol=1e-10):
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol * max(1.0, abs(a) + abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def uniqueness_threshold(
    firms, params: ModelParams, grid: CityGrid, scan_points: int = 2000
) -> float:
    """Preference-exponent threshold theta0 below which the equilibrium is unique.

    Minimizes the profit curvature over firms and over the analytic wage box
    (grid scan plus golden-section refinement around the scan minimum), then
    maps alpha0 = (w0/N) * min pi'' through theta0 = alpha0 / (1 + alpha0).
    """
    if not firms:
        raise NumericInputError("uniqueness threshold needs at least one firm")
    w_lo, w_hi = wage_bounds(firms, params, grid)
    ws = np.linspace(w_lo, w_hi, scan_points)
    nu = math.inf
    for f in firms:
        curv = econ.profit_curvature(f.tech, ws)
        j = int(np.argmin(curv))
        a = ws[max(j - 1, 0)]
        b = ws[min(j + 1, scan_points - 1)]
        _, val = _golden_minimize(lambda w: econ.profit_curvature(f.tech, w), a, b)
        nu = min(nu, float(val), float(curv[j]))
    alpha0 = params.w0 * nu / len(firms)
    return alpha0 / (1.0 + alpha0)


@dataclass
class CouplingReport:
    """Worker-to-option coupling gamma(i, x) and its marginal checks."""

    coupling: list[Field]
    marginals: np.ndarray
    row_sum_error: float
    marginal_error: float
    home_consistency_error: float
    ok: bool


def coupling_diagnostics(result: EquilibriumResult, tol: float = 1e-8) -> CouplingReport:
    """Check that the share fields of a converged solve form a valid coupling:
    rows sum to one at every node, option marginals under mu match the
    reported labor supplies, and the home mass equals 1 + sum_i pi'_i(w_i).
    """
    if not result.converged:
        raise ValueError("coupling diagnostics require a converged result")
    grid = result.revenue.grid
    shares = np.vstack([f.values for f in result.shares])
    row_sum_error = float(np.max(np.abs(shares.sum(axis=0) - 1.0)))
    mu_weighted = grid.quad_weights * result.density.values
    marginals = shares @ mu_weighted
    marginal_error = float(np.max(np.abs(marginals - result.labor_supply)))
    home_pred = 1.0 + sum(
        econ.profit_derivative(f.tech, w)
        for f, w in zip(result.firms, result.wages)
    )
    home_consistency_error = float(abs(home_pred - result.labor_supply[0]))
    ok = (
        row_sum_error <= 1e-12
        and marginal_error <= 1e-10
        and home_consistency_error <= tol
    )
    return CouplingReport(
        coupling=list(result.shares),
        marginals=marginals,
        row_sum_error=row_sum_error,
        marginal_error=marginal_error,
        home_consistency_error=home_consistency_error,
        ok=ok,
    )
