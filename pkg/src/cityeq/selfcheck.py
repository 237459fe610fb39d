"""Built-in cross-module oracle suite.

Every check recomputes a quantity along an independent route (finite
differences, Monte Carlo, grid refinement, a second solver) and reports the
margin to its tolerance. Used by the ``check`` CLI subcommand and by tests.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import economy as econ
from .config import parse_config
from .economy import CobbDouglas, FirmSpec, ModelParams
from .errors import ConfigError
from .grid import Field, build_grid, integrate
from .solver import SolverConfig, solve_by_fixed_point, solve_equilibrium
from .telework import CES2, TeleFirmSpec, solve_tele_equilibrium
from .zeronoise import hard_revenue_field

EULER_GAMMA = float(np.euler_gamma)


def centered_gumbel(rng: np.random.Generator, size) -> np.ndarray:
    """Centered standard Gumbel draws by inverse CDF: -log(-log U) - gamma."""
    u = rng.uniform(size=size)
    return -np.log(-np.log(u)) - EULER_GAMMA


@dataclass
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str


def _test1_variant(nodes=101):
    grid = build_grid(1, (-10.0, 10.0), nodes)
    tech = CobbDouglas(A=1e4, beta=0.7)
    firms = [FirmSpec((y,), tech) for y in (-7.0, 0.0, 3.0)]
    params = ModelParams(theta=0.0, sigma=0.1, w0=12.0)
    return grid, firms, params


def _check_quadrature(tamper: float | None) -> CheckResult:
    f = np.cos
    exact = float(np.sin(10.0) - np.sin(-10.0))
    errs = []
    for nodes in (101, 201):
        g = build_grid(1, (-10.0, 10.0), nodes)
        if tamper is not None:
            w = g.quad_weights.copy()
            w[nodes // 2] *= tamper
            g = dataclasses.replace(g, quad_weights=w)
        errs.append(abs(integrate(Field(g, f(g.nodes[:, 0]))) - exact))
    ratio = errs[0] / errs[1]
    ok = 3.5 <= ratio <= 4.5
    return CheckResult(
        "quadrature-refinement", ok, min(ratio - 3.5, 4.5 - ratio),
        f"halving-step error ratio {ratio:.4g}, target [3.5, 4.5]",
    )


def _check_envelope() -> CheckResult:
    worst = 0.0
    tech = CobbDouglas(A=1e4, beta=0.7)
    for w in (5.0, 12.0, 30.0):
        eps = 1e-6 * w
        fd = -(econ.profit(tech, w + eps) - econ.profit(tech, w - eps)) / (2 * eps)
        worst = max(worst, abs(fd - econ.labor_demand(tech, w)) / econ.labor_demand(tech, w))
    ces = CES2(A=1e4, B=0.5, alpha=0.9, beta=0.7)
    from .telework import tele_demands, tele_profit

    for w1, w2 in ((12.0, 12.0), (18.0, 9.0)):
        l1, l2 = tele_demands(ces, w1, w2)
        e1 = 1e-6 * w1
        fd1 = -(tele_profit(ces, w1 + e1, w2) - tele_profit(ces, w1 - e1, w2)) / (2 * e1)
        e2 = 1e-6 * w2
        fd2 = -(tele_profit(ces, w1, w2 + e2) - tele_profit(ces, w1, w2 - e2)) / (2 * e2)
        worst = max(worst, abs(fd1 - l1) / l1, abs(fd2 - l2) / l2)
    ok = worst <= 1e-4
    return CheckResult(
        "envelope-derivatives", ok, 1e-4 - worst,
        f"max relative gap demand vs -d(profit)/dw: {worst:.3e} (tol 1e-4)",
    )


def _check_share_gradient() -> CheckResult:
    values = np.array([12.0, 10.5, 9.0, 8.0])
    sigma = 0.1
    shares = econ.choice_shares(values, sigma)
    eps = 1e-5
    worst = 0.0
    for i in range(len(values)):
        vp, vm = values.copy(), values.copy()
        vp[i] += eps
        vm[i] -= eps
        fd = (econ.revenue_softmax(vp, sigma) - econ.revenue_softmax(vm, sigma)) / (2 * eps)
        worst = max(worst, abs(fd - shares[i]))
    ok = worst <= 1e-6
    return CheckResult(
        "share-gradient", ok, 1e-6 - worst,
        f"max |share - dR/dv| = {worst:.3e} (tol 1e-6)",
    )


def _check_gumbel_mc(draws: int) -> CheckResult:
    rng = np.random.default_rng(20240517)
    values = np.array([12.0, 11.6, 11.2, 12.1])
    sigma = 0.1
    eps = centered_gumbel(rng, (len(values), draws))
    perturbed = values[:, None] + sigma * eps
    maxima = perturbed.max(axis=0)
    mean, se = maxima.mean(), maxima.std(ddof=1) / np.sqrt(draws)
    target = econ.revenue_softmax(values, sigma)
    z_mean = abs(mean - target) / se

    shares = econ.choice_shares(values, sigma)
    counts = np.bincount(perturbed.argmax(axis=0), minlength=len(values))
    freqs = counts / draws
    se_f = np.sqrt(np.maximum(shares * (1 - shares), 1e-12) / draws)
    z_freq = float(np.max(np.abs(freqs - shares) / se_f))
    worst = max(z_mean, z_freq)
    ok = worst <= 4.0
    return CheckResult(
        "gumbel-monte-carlo", ok, 4.0 - worst,
        f"max deviation {worst:.2f} standard errors over mean + frequencies "
        f"(limit 4), M={draws}",
    )


def _check_cross_method() -> CheckResult:
    grid, firms, params = _test1_variant(nodes=101)
    cfg = SolverConfig()
    a = solve_equilibrium(firms, params, grid, cfg)
    b = solve_by_fixed_point(firms, params, grid, cfg)
    gap = float(np.max(np.abs(a.wages - b.wages)))
    ok = a.converged and b.converged and gap <= 1e-6
    return CheckResult(
        "cross-method-agreement", ok, 1e-6 - gap,
        f"hybrid vs fixed-point wage gap {gap:.3e} (tol 1e-6)",
    )


def _check_telework_reduction() -> CheckResult:
    grid, base_firms, params = _test1_variant(nodes=101)
    tele_firms = [
        TeleFirmSpec(f.location, CES2(A=1e4, B=0.0, alpha=0.9, beta=0.7))
        for f in base_firms
    ]
    a = solve_equilibrium(base_firms, params, grid)
    b = solve_tele_equilibrium(tele_firms, params, grid)
    gap = float(np.max(np.abs(a.wages - b.onsite_wages)))
    ok = (
        a.converged
        and b.converged
        and gap <= 1e-9
        and float(np.max(b.remote_mass)) == 0.0
        and bool(np.all(np.isnan(b.remote_wages)))
    )
    return CheckResult(
        "telework-reduction", ok, 1e-9 - gap,
        f"B=0 telework vs base wage gap {gap:.3e}; remote masses all zero",
    )


def _check_sandwich() -> CheckResult:
    grid, firms, params = _test1_variant(nodes=101)
    rng = np.random.default_rng(7)
    worst = -np.inf
    n_opts = len(firms) + 1
    for sigma in (1.0, 0.1, 0.01):
        for _ in range(5):
            wages = rng.uniform(8.0, 30.0, size=len(firms))
            p = ModelParams(theta=0.0, sigma=sigma, w0=params.w0)
            values = econ.value_matrix(grid, wages, p, firms)
            r_sig = econ.softmax_values(values, sigma)
            r_zero = hard_revenue_field(grid, wages, p, firms).values
            gap = r_sig - r_zero
            violation = max(
                float(np.max(-gap)), float(np.max(gap - sigma * np.log(n_opts)))
            )
            worst = max(worst, violation)
    ok = worst <= 1e-12
    return CheckResult(
        "softmax-sandwich", ok, 1e-12 - worst,
        f"max violation of 0 <= R_sigma - R_0 <= sigma*log(n): {worst:.2e}",
    )


def _check_sigma_zero_rejected() -> CheckResult:
    doc = {
        "grid": {"dimension": 1, "bounds": [-10, 10], "nodes_per_axis": 11},
        "firms": [],
        "params": {"theta": 0.0, "sigma": 0.0, "w0": 12.0},
        "mode": "base",
    }
    try:
        parse_config(doc)
    except ConfigError:
        return CheckResult(
            "zero-sigma-rejected", True, 1.0,
            "sigma = 0 in base mode is rejected at validation",
        )
    return CheckResult(
        "zero-sigma-rejected", False, -1.0,
        "sigma = 0 base config was accepted but must be rejected",
    )


@dataclass
class SelfCheckReport:
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def self_check(
    mc_draws: int = 10**5, quiet: bool = False, _tamper_weights: float | None = None
) -> SelfCheckReport:
    """Run the oracle suite; ``_tamper_weights`` is a fault-injection hook
    that scales one interior quadrature weight to prove the refinement check
    has teeth."""
    checks = [
        _check_quadrature(_tamper_weights),
        _check_envelope(),
        _check_share_gradient(),
        _check_gumbel_mc(mc_draws),
        _check_cross_method(),
        _check_telework_reduction(),
        _check_sandwich(),
        _check_sigma_zero_rejected(),
    ]
    report = SelfCheckReport(checks)
    if not quiet:
        for c in checks:
            flag = "PASS" if c.passed else "FAIL"
            print(f"[{flag}] {c.name:<24} margin={c.margin:+.3e}  {c.detail}")
        print(f"self-check: {'all checks passed' if report.passed else 'FAILURES'}")
    return report
