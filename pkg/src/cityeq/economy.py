"""Economic primitives: production, profit, labor demand, softmax revenue,
Gibbs commuting shares, residential density and rent recovery.

All functions are pure and operate either on scalars / small vectors (the
per-location API) or on whole grids at once (the ``*_matrix`` helpers used
inside the solvers).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidPreferenceError,
    InvalidWageError,
    NumericInputError,
)
from .grid import CityGrid, Field

#: Numerical floor for exponents of the kind theta/(1-theta); theta is
#: validated strictly below 1 everywhere.
_ONE = 1.0


@dataclass(frozen=True)
class CobbDouglas:
    """Single-input technology f(l) = A^(1-beta) * l^beta.

    Increasing and strictly concave for beta in (0,1), with unbounded
    marginal product at 0 and vanishing marginal product at infinity, so
    labor demand is well defined for every positive wage.
    """

    A: float
    beta: float

    def __post_init__(self):
        if not (self.A > 0 and np.isfinite(self.A)):
            raise NumericInputError(f"productivity A must be > 0, got {self.A}")
        if not (0.0 < self.beta < 1.0):
            raise NumericInputError(f"beta must be in (0,1), got {self.beta}")

    def output(self, labor):
        return self.A ** (1.0 - self.beta) * np.asarray(labor, dtype=float) ** self.beta


@dataclass(frozen=True)
class FirmSpec:
    """A firm: a fixed location in the city plus its technology.

    ``commute_cost`` optionally replaces the default scaled Euclidean
    distance with any continuous cost of residence position: a callable
    taking an (K, d) array of points and returning (K,) costs.
    """

    location: tuple[float, ...]
    tech: CobbDouglas
    commute_cost: object = None

    def __post_init__(self):
        loc = tuple(float(c) for c in np.atleast_1d(self.location))
        object.__setattr__(self, "location", loc)


@dataclass(frozen=True)
class ModelParams:
    """Household and market parameters.

    theta: Cobb-Douglas preference exponent on consumption, in [0,1).
    sigma: revenue noise level; > 0 for the smoothed model, 0 only for the
        zero-noise functions.
    w0: exogenous home wage, > 0.
    commute_scale: multiplier on Euclidean distance in the commuting cost.
    """

    theta: float
    sigma: float
    w0: float
    commute_scale: float = 0.5

    def __post_init__(self):
        if not (0.0 <= self.theta < 1.0):
            raise InvalidPreferenceError(f"theta must be in [0,1), got {self.theta}")
        if not (self.sigma >= 0.0 and np.isfinite(self.sigma)):
            raise NumericInputError(f"sigma must be >= 0, got {self.sigma}")
        if not (self.w0 > 0.0 and np.isfinite(self.w0)):
            raise NumericInputError(f"w0 must be > 0, got {self.w0}")
        if not (self.commute_scale >= 0.0 and np.isfinite(self.commute_scale)):
            raise NumericInputError(
                f"commute_scale must be >= 0, got {self.commute_scale}"
            )


def _check_wage(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if np.any(~np.isfinite(w)) or np.any(w <= 0.0):
        raise InvalidWageError(f"wages must be finite and > 0, got {w!r}")
    return w


def labor_demand(tech: CobbDouglas, w):
    """Profit-maximizing employment at wage w.

    Solves f'(l) = w: L(w) = (beta * A^(1-beta) / w)^(1/(1-beta)).
    Strictly decreasing, diverging as w -> 0+ and vanishing as w -> inf.
    """
    w = _check_wage(w)
    b = tech.beta
    out = (b * tech.A ** (1.0 - b) / w) ** (1.0 / (1.0 - b))
    return out if out.ndim else float(out)


def profit(tech: CobbDouglas, w):
    """Maximized profit pi(w) = f(L(w)) - w * L(w), nonnegative and convex."""
    w = _check_wage(w)
    l = labor_demand(tech, w)
    out = tech.output(l) - w * l
    return out if np.ndim(out) else float(out)


def profit_derivative(tech: CobbDouglas, w):
    """pi'(w) = -L(w) by the envelope theorem."""
    return -labor_demand(tech, w)


def profit_curvature(tech: CobbDouglas, w):
    """pi''(w) = -L'(w) = L(w) / ((1-beta) * w), strictly positive."""
    w = _check_wage(w)
    out = labor_demand(tech, w) / ((1.0 - tech.beta) * w)
    return out if np.ndim(out) else float(out)


def inverse_profit(tech: CobbDouglas, target: float) -> float:
    """The wage at which pi(w) equals ``target`` (pi is strictly decreasing).

    Closed form via pi(w) = A (1-beta) beta^(beta/(1-beta)) w^(-beta/(1-beta)).
    """
    if target <= 0:
        raise NumericInputError(f"profit target must be > 0, got {target}")
    b = tech.beta
    k = tech.A * (1.0 - b) * b ** (b / (1.0 - b))
    return float((k / target) ** ((1.0 - b) / b))


def firm_costs(firm, points: np.ndarray, params: ModelParams) -> np.ndarray:
    """Commuting cost of the firm at each point: the firm's own cost function
    when it carries one, otherwise commute_scale * Euclidean distance."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if firm.commute_cost is not None:
        c = np.asarray(firm.commute_cost(pts), dtype=float)
        if c.shape != (pts.shape[0],) or np.any(~np.isfinite(c)):
            raise NumericInputError(
                "custom commute cost must return one finite value per point"
            )
        return c
    loc = np.asarray(firm.location, dtype=float)
    return params.commute_scale * np.linalg.norm(pts - loc[None, :], axis=1)


def commute_cost_matrix(
    grid: CityGrid, firms, params: ModelParams
) -> np.ndarray:
    """Commuting costs c_i(x) over all nodes as an (N, K) matrix."""
    if not firms:
        return np.zeros((0, grid.node_count))
    return np.vstack([firm_costs(f, grid.nodes, params) for f in firms])


def net_values(x, wages, params: ModelParams, firms) -> np.ndarray:
    """Net values [w0, w_1 - c_1(x), ..., w_N - c_N(x)] at one location."""
    x = np.atleast_1d(np.asarray(x, dtype=float))[None, :]
    out = np.empty(len(firms) + 1)
    out[0] = params.w0
    if firms:
        wages = _check_wage(wages)
        costs = np.array([firm_costs(f, x, params)[0] for f in firms])
        out[1:] = wages - costs
    return out


def value_matrix(
    grid: CityGrid, wages, params: ModelParams, firms, costs: np.ndarray | None = None
) -> np.ndarray:
    """Net values of all N+1 options at all nodes, shape (N+1, K); row 0 is home."""
    if costs is None:
        costs = commute_cost_matrix(grid, firms, params)
    v = np.empty((len(firms) + 1, grid.node_count))
    v[0] = params.w0
    if firms:
        wages = _check_wage(wages)
        v[1:] = np.asarray(wages)[:, None] - costs
    return v


def _check_sigma(sigma: float) -> float:
    if not (sigma > 0.0 and np.isfinite(sigma)):
        raise NumericInputError(
            f"sigma must be > 0 (got {sigma}); use the zero-noise functions "
            "for the sigma = 0 model"
        )
    return float(sigma)


def softmax_values(values: np.ndarray, sigma: float) -> np.ndarray:
    """sigma * log(sum_i exp(v_i / sigma)) along axis 0, log-sum-exp stabilized."""
    sigma = _check_sigma(sigma)
    v = np.asarray(values, dtype=float)
    m = np.max(v, axis=0)
    return m + sigma * np.log(np.sum(np.exp((v - m) / sigma), axis=0))


def share_values(values: np.ndarray, sigma: float) -> np.ndarray:
    """Gibbs shares exp(v_i/sigma) / sum_j exp(v_j/sigma) along axis 0, stabilized."""
    sigma = _check_sigma(sigma)
    v = np.asarray(values, dtype=float)
    e = np.exp((v - np.max(v, axis=0)) / sigma)
    return e / np.sum(e, axis=0)


def revenue_softmax(values, sigma: float) -> float:
    """Smoothed maximum of the option values at one location.

    Satisfies max(v) <= result <= max(v) + sigma * log(len(v)).
    """
    return float(softmax_values(np.asarray(values, dtype=float), sigma))


def choice_shares(values, sigma: float) -> np.ndarray:
    """Choice probabilities over the options at one location.

    Nonnegative, summing to 1, and equal to the gradient of
    ``revenue_softmax`` with respect to each value entry.
    """
    return share_values(np.asarray(values, dtype=float), sigma)


def density_from_revenue(revenue: Field, theta: float) -> Field:
    """Residential density mu proportional to R^(theta/(1-theta)), normalized
    to integrate to 1 under the grid's trapezoid rule.

    Computed through logs so that large exponents (theta near 1) cannot
    overflow.
    """
    if not (0.0 <= theta < _ONE):
        raise InvalidPreferenceError(f"theta must be in [0,1), got {theta}")
    r = revenue.values
    if np.any(r <= 0.0):
        raise NumericInputError("revenue must be strictly positive everywhere")
    alpha = theta / (1.0 - theta)
    t = alpha * np.log(r)
    t -= np.max(t)
    unnorm = np.exp(t)
    z = float(np.dot(revenue.grid.quad_weights, unnorm))
    return Field(revenue.grid, unnorm / z)


def rent_from_density(revenue: Field, density: Field, theta: float) -> Field:
    """Rent field Q = (1-theta) * R * mu.

    Follows from eliminating the per-worker surface S between the housing
    demand S = (1-theta) R / Q and the land market clearing mu * S = 1; the
    level of Q is pinned down, no free constant.
    """
    if not (0.0 <= theta < _ONE):
        raise InvalidPreferenceError(
            f"theta must be in [0,1), got {theta} (theta = 1 degenerates Q to 0)"
        )
    if density.grid is not revenue.grid and density.grid != revenue.grid:
        raise NumericInputError("revenue and density live on different grids")
    return Field(revenue.grid, (1.0 - theta) * revenue.values * density.values)
