"""Teleworking extension: two-input CES technology (on-site and remote labor),
a (2N+1)-option choice set where remote work carries no commuting cost, and
the 2N-equation wage system solved with the same hybrid root finder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import economy as econ
from .economy import CobbDouglas, ModelParams
from .errors import InvalidWageError, NumericInputError
from .grid import CityGrid, Field
from .hybrid import RootResult, hybrid_root
from .solver import SolverConfig

#: Below this remote productivity the remote options are dropped from the
#: choice set: remote demand is identically ~0 while smoothed supply stays
#: positive at any finite wage, so the remote equations have no root.
REMOTE_PRODUCTIVITY_FLOOR = 1e-3


@dataclass(frozen=True)
class CES2:
    """Two-input technology f(l, s) = A^(1-beta) * (l^alpha + B s^alpha)^(beta/alpha).

    l is on-site labor, s remote labor, B the relative remote productivity.
    Increasing in both inputs and strictly concave for alpha, beta in (0,1).
    """

    A: float
    B: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.A > 0 and np.isfinite(self.A)):
            raise NumericInputError(f"productivity A must be > 0, got {self.A}")
        if not (self.B >= 0 and np.isfinite(self.B)):
            raise NumericInputError(f"remote productivity B must be >= 0, got {self.B}")
        if not (0.0 < self.alpha < 1.0):
            raise NumericInputError(f"alpha must be in (0,1), got {self.alpha}")
        if not (0.0 < self.beta < 1.0):
            raise NumericInputError(f"beta must be in (0,1), got {self.beta}")

    def output(self, onsite, remote):
        l = np.asarray(onsite, dtype=float)
        s = np.asarray(remote, dtype=float)
        return self.A ** (1.0 - self.beta) * (
            l**self.alpha + self.B * s**self.alpha
        ) ** (self.beta / self.alpha)

    def reduced(self) -> CobbDouglas:
        """The single-input technology obtained by shutting the remote input."""
        return CobbDouglas(A=self.A, beta=self.beta)


@dataclass(frozen=True)
class TeleFirmSpec:
    """Firm with a two-input technology; ``commute_cost`` as in FirmSpec
    (remote work never pays a commuting cost regardless)."""

    location: tuple[float, ...]
    tech: CES2
    commute_cost: object = None

    def __post_init__(self):
        loc = tuple(float(c) for c in np.atleast_1d(self.location))
        object.__setattr__(self, "location", loc)


def _check_pair(w1, w2):
    if not (w1 > 0 and w2 > 0 and np.isfinite(w1) and np.isfinite(w2)):
        raise InvalidWageError(f"wages must be finite and > 0, got ({w1}, {w2})")


def tele_demands(tech: CES2, w1: float, w2: float) -> tuple[float, float]:
    """Profit-maximizing (on-site, remote) employment at wages (w1, w2).

    The first-order conditions reduce to the input ratio
    rho = s/l = (B*w1/w2)^(1/(1-alpha)); substituting back turns the
    remaining condition into a single power equation in l, solved exactly.
    """
    _check_pair(w1, w2)
    a, b = tech.alpha, tech.beta
    if tech.B == 0.0:
        return econ.labor_demand(tech.reduced(), w1), 0.0
    rho = (tech.B * w1 / w2) ** (1.0 / (1.0 - a))
    k = 1.0 + tech.B * rho**a
    l = (b * tech.A ** (1.0 - b) * k ** ((b - a) / a) / w1) ** (1.0 / (1.0 - b))
    return float(l), float(rho * l)


def tele_profit(tech: CES2, w1: float, w2: float) -> float:
    """Maximized profit of the two-input firm; convex, decreasing in each wage."""
    l, s = tele_demands(tech, w1, w2)
    return float(tech.output(l, s) - w1 * l - w2 * s)


def tele_profit_gradient(tech: CES2, w1: float, w2: float) -> tuple[float, float]:
    """(d pi/d w1, d pi/d w2) = (-L1, -L2) by the envelope theorem."""
    l, s = tele_demands(tech, w1, w2)
    return -l, -s


def tele_profit_hessian_fd(tech: CES2, w1: float, w2: float, rel_step=1e-6):
    """Symmetrized central-difference Hessian of the profit in the two wages."""
    h1 = rel_step * max(abs(w1), 1.0)
    h2 = rel_step * max(abs(w2), 1.0)
    gp1 = tele_profit_gradient(tech, w1 + h1, w2)
    gm1 = tele_profit_gradient(tech, w1 - h1, w2)
    gp2 = tele_profit_gradient(tech, w1, w2 + h2)
    gm2 = tele_profit_gradient(tech, w1, w2 - h2)
    h11 = (gp1[0] - gm1[0]) / (2 * h1)
    h21 = (gp1[1] - gm1[1]) / (2 * h1)
    h12 = (gp2[0] - gm2[0]) / (2 * h2)
    h22 = (gp2[1] - gm2[1]) / (2 * h2)
    return np.array([[h11, 0.5 * (h12 + h21)], [0.5 * (h12 + h21), h22]])


def symmetric_eigen_floor(h: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric 2x2 matrix, closed form."""
    mean = 0.5 * (h[0, 0] + h[1, 1])
    disc = math.hypot(0.5 * (h[0, 0] - h[1, 1]), h[0, 1])
    return mean - disc


def remote_active_mask(firms) -> np.ndarray:
    return np.array(
        [f.tech.B >= REMOTE_PRODUCTIVITY_FLOOR for f in firms], dtype=bool
    )


def _tele_option_labels(n: int, active: np.ndarray) -> list[str]:
    labels = ["home"] + [f"onsite_{i}" for i in range(1, n + 1)]
    labels += [f"remote_{i + 1}" for i in range(n) if active[i]]
    return labels


def _tele_state(w1, w2_active, firms, params, grid, active, costs):
    """Nodal state of the telework system for on-site wages w1 (N,) and the
    wages of the active remote options w2_active (A,)."""
    n = len(firms)
    n_active = int(active.sum())
    values = np.empty((1 + n + n_active, grid.node_count))
    values[0] = params.w0
    values[1 : n + 1] = np.asarray(w1)[:, None] - costs
    if n_active:
        values[n + 1 :] = np.asarray(w2_active)[:, None]
    shares = econ.share_values(values, params.sigma)
    revenue = Field(grid, econ.softmax_values(values, params.sigma))
    density = econ.density_from_revenue(revenue, params.theta)
    weighted = grid.quad_weights * density.values
    supply = shares @ weighted

    demand_onsite = np.empty(n)
    demand_remote = np.zeros(n)
    idx_active = np.flatnonzero(active)
    w2_full = np.full(n, np.nan)
    w2_full[idx_active] = w2_active
    for i, f in enumerate(firms):
        if active[i]:
            demand_onsite[i], demand_remote[i] = tele_demands(
                f.tech, w1[i], w2_full[i]
            )
        else:
            demand_onsite[i] = econ.labor_demand(f.tech.reduced(), w1[i])
    residual_onsite = -demand_onsite + supply[1 : n + 1]
    residual_remote = -demand_remote[idx_active] + supply[n + 1 :]
    return {
        "values": values,
        "shares": shares,
        "revenue": revenue,
        "density": density,
        "supply": supply,
        "demand_onsite": demand_onsite,
        "demand_remote": demand_remote,
        "residual_onsite": residual_onsite,
        "residual_remote": residual_remote,
        "w2_full": w2_full,
    }


def assemble_tele_residual(
    wages, firms, params: ModelParams, grid: CityGrid, active=None
) -> np.ndarray:
    """Residual of the 2N-equation system at the wage pairs ``wages``.

    ``wages`` is (N, 2) (or flat, interleaved per firm); the return value is
    flat and interleaved the same way. When ``active`` masks out a firm's
    remote option its remote residual entry is reported as 0 and its remote
    wage is ignored.
    """
    w = np.asarray(wages, dtype=float).reshape(len(firms), 2)
    if active is None:
        active = np.ones(len(firms), dtype=bool)
    active = np.asarray(active, dtype=bool)
    if np.any(w[:, 0] <= 0) or np.any(w[active, 1] <= 0):
        raise InvalidWageError("wages must be positive")
    econ._check_sigma(params.sigma)
    costs = econ.commute_cost_matrix(grid, firms, params)
    st = _tele_state(w[:, 0], w[active, 1], firms, params, grid, active, costs)
    out = np.zeros((len(firms), 2))
    out[:, 0] = st["residual_onsite"]
    out[active, 1] = st["residual_remote"]
    return out.ravel()


def tele_wage_bounds(firms, params: ModelParams, grid: CityGrid, active=None):
    """Analytic wage box for the telework system.

    Same construction as the base model: the upper bound dominates the value
    of the all-home-wage point, and the lower bound is where profit (with the
    other wage at its maximum) climbs back to the upper bound.
    """
    if active is None:
        active = remote_active_mask(firms)
    costs = econ.commute_cost_matrix(grid, firms, params)
    m = float(np.max(costs)) if len(firms) else 0.0
    total = 0.0
    for i, f in enumerate(firms):
        if active[i]:
            total += tele_profit(f.tech, params.w0, params.w0)
        else:
            total += econ.profit(f.tech.reduced(), params.w0)
    n_opts = 1 + len(firms) + int(np.sum(active))
    w_hi = 2.0 * m + total + params.sigma * math.log(n_opts) + params.w0

    w_lo = w_hi
    for i, f in enumerate(firms):
        if active[i]:
            curves = [
                lambda v: tele_profit(f.tech, v, w_hi) - w_hi,
                lambda v: tele_profit(f.tech, w_hi, v) - w_hi,
            ]
            for fn in curves:
                lo = w_hi * 1e-3
                while fn(lo) <= 0 and lo > 1e-300:
                    lo *= 0.5
                w_lo = min(w_lo, brentq(fn, lo, w_hi, xtol=1e-12))
        else:
            w_lo = min(w_lo, econ.inverse_profit(f.tech.reduced(), w_hi))
    return float(w_lo), float(w_hi)


@dataclass
class TeleworkEquilibriumResult:
    """Converged (or best-effort) state of the telework wage system.

    Remote wages of firms with the remote option removed (B below the
    productivity floor) are reported as NaN with zero remote mass.
    """

    onsite_wages: np.ndarray
    remote_wages: np.ndarray
    onsite_demand: np.ndarray
    remote_demand: np.ndarray
    onsite_mass: np.ndarray
    remote_mass: np.ndarray
    home_mass: float
    revenue: Field
    density: Field
    rent: Field
    shares: list[Field]
    labor_supply: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    wage_box: tuple[float, float]
    remote_active: np.ndarray
    method: str
    trace: list[dict] = field(default_factory=list)
    events: list[str] = field(default_factory=list)
    firms: tuple = ()
    params: ModelParams | None = None
    option_labels: list[str] = field(default_factory=list)


def solve_tele_equilibrium(
    firms,
    params: ModelParams,
    grid: CityGrid,
    config: SolverConfig | None = None,
) -> TeleworkEquilibriumResult:
    """Solve the telework system for the on-site and remote wages.

    Firms whose remote productivity sits below ``REMOTE_PRODUCTIVITY_FLOOR``
    have their remote option removed from the choice set (their production
    then degenerates to the single-input technology); they come back with
    zero remote mass and NaN remote wage.
    """
    config = config or SolverConfig()
    econ._check_sigma(params.sigma)
    n = len(firms)
    active = remote_active_mask(firms)
    idx_active = np.flatnonzero(active)
    n_active = len(idx_active)
    costs = econ.commute_cost_matrix(grid, firms, params)
    events: list[str] = []
    for i in np.flatnonzero(~active):
        events.append(
            f"firm {i + 1}: remote productivity {firms[i].tech.B:g} below "
            f"{REMOTE_PRODUCTIVITY_FLOOR:g}; remote option removed from the choice set"
        )

    w_lo, w_hi = tele_wage_bounds(firms, params, grid, active)

    if config.initial_wages is not None:
        init = np.asarray(config.initial_wages, dtype=float).reshape(n, 2)
        w1 = init[:, 0].copy()
        w2 = init[:, 1].copy()
        w2[~np.isfinite(w2)] = params.w0
    else:
        w1 = np.full(n, params.w0)
        w2 = np.full(n, params.w0)
    if np.any(w1 <= 0) or np.any(w2[active] <= 0):
        raise InvalidWageError("initial wages must be positive")

    u0 = np.concatenate([np.log(w1), np.log(w2[idx_active])])
    u_floor = math.log(w_lo / 2.0)
    u_ceil = math.log(w_hi) + 10.0

    def project(u):
        clipped = np.clip(u, u_floor, u_ceil)
        if np.any(clipped != u):
            events.append("wage iterate clamped to the admissible range")
        return clipped

    def residual_log(u):
        st = _tele_state(
            np.exp(u[:n]), np.exp(u[n:]), firms, params, grid, active, costs
        )
        return np.concatenate([st["residual_onsite"], st["residual_remote"]])

    if n == 0:
        root = RootResult(np.zeros(0), np.zeros(0), 0.0, 0, True, "no firms")
        u_sol = np.zeros(0)
    else:
        root = hybrid_root(
            residual_log,
            u0,
            tol=config.residual_tolerance,
            max_iter=config.max_iterations,
            fd_scale=config.fd_scale,
            trust_radius=config.trust_radius_init,
            project=project,
        )
        u_sol = root.x

    w1_sol = np.exp(u_sol[:n])
    w2_sol = np.exp(u_sol[n:])
    st = _tele_state(w1_sol, w2_sol, firms, params, grid, active, costs)
    rent = econ.rent_from_density(st["revenue"], st["density"], params.theta)
    share_fields = [Field(grid, row) for row in st["shares"]]

    supply = st["supply"]
    onsite_mass = supply[1 : n + 1]
    remote_mass = np.zeros(n)
    remote_mass[idx_active] = supply[n + 1 :]
    resid = np.concatenate([st["residual_onsite"], st["residual_remote"]])
    return TeleworkEquilibriumResult(
        onsite_wages=w1_sol,
        remote_wages=st["w2_full"],
        onsite_demand=st["demand_onsite"],
        remote_demand=st["demand_remote"],
        onsite_mass=onsite_mass,
        remote_mass=remote_mass,
        home_mass=float(supply[0]) if n else 1.0,
        revenue=st["revenue"],
        density=st["density"],
        rent=rent,
        shares=share_fields,
        labor_supply=supply,
        residual_norm=float(np.max(np.abs(resid))) if n else 0.0,
        iterations=root.iterations,
        converged=root.success,
        wage_box=(w_lo, w_hi),
        remote_active=active,
        method="hybrid",
        trace=root.trace,
        events=events,
        firms=tuple(firms),
        params=params,
        option_labels=_tele_option_labels(n, active),
    )


def tele_uniqueness_threshold(
    firms, params: ModelParams, grid: CityGrid, scan_points: int = 40
) -> float:
    """Uniqueness threshold for the telework system.

    nu is the smallest eigenvalue of the profit Hessian, minimized over firms
    and over a scan of the wage box (with a finer local scan around the coarse
    minimum); theta0 = alpha0/(1+alpha0) with alpha0 = w0 * nu / (2N).
    """
    if not firms:
        raise NumericInputError("uniqueness threshold needs at least one firm")
    for f in firms:
        if f.tech.B <= 0.0:
            raise NumericInputError(
                "tele uniqueness threshold requires B > 0 for every firm "
                "(the profit Hessian degenerates at B = 0)"
            )
    w_lo, w_hi = tele_wage_bounds(
        firms, params, grid, active=np.ones(len(firms), dtype=bool)
    )
    ws = np.linspace(w_lo, w_hi, scan_points)

    def floor_for(tech, grid_w):
        best = math.inf
        arg = (grid_w[0], grid_w[0])
        for a in grid_w:
            for b in grid_w:
                lam = symmetric_eigen_floor(tele_profit_hessian_fd(tech, a, b))
                if lam < best:
                    best, arg = lam, (a, b)
        return best, arg

    nu = math.inf
    h = ws[1] - ws[0]
    for f in firms:
        best, (a, b) = floor_for(f.tech, ws)
        local_a = np.linspace(max(w_lo, a - h), min(w_hi, a + h), 9)
        local_b = np.linspace(max(w_lo, b - h), min(w_hi, b + h), 9)
        for aa in local_a:
            for bb in local_b:
                lam = symmetric_eigen_floor(tele_profit_hessian_fd(f.tech, aa, bb))
                best = min(best, lam)
        nu = min(nu, best)
    alpha0 = params.w0 * nu / (2.0 * len(firms))
    return alpha0 / (1.0 + alpha0)
