"""Dense nonlinear-equation solver: dogleg trust region with Broyden updates.

The step is the classic hybrid between the Gauss-Newton step and the scaled
gradient-descent (Cauchy) step for the least-squares merit 0.5*||F||^2. The
Jacobian is built once by forward differences and then kept current with
Broyden rank-one updates; it is rebuilt from scratch whenever two consecutive
trial steps are rejected or the updated matrix goes numerically singular.

Everything is deterministic: no randomized restarts, fixed evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_ACCEPT_RATIO = 1e-4
_SHRINK, _GROW = 0.5, 2.0
_LOW, _HIGH = 0.25, 0.75
_MIN_RADIUS = 1e-14


@dataclass
class RootResult:
    x: np.ndarray
    fvec: np.ndarray
    residual_norm: float
    iterations: int
    success: bool
    message: str
    trace: list[dict] = field(default_factory=list)
    nfev: int = 0


def forward_jacobian(func, x, f0, fd_scale):
    """Forward-difference Jacobian of func at x, one column per variable."""
    n = x.size
    jac = np.empty((f0.size, n))
    for j in range(n):
        step = fd_scale * max(abs(x[j]), 1.0)
        xp = x.copy()
        xp[j] += step
        jac[:, j] = (func(xp) - f0) / step
    return jac


def _dogleg(jac, f, radius):
    """Return (step, step_type) minimizing the linear model within the radius."""
    g = jac.T @ f
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0.0:
        return np.zeros_like(g), "gauss-newton"
    try:
        p_gn = np.linalg.solve(jac, -f)
    except np.linalg.LinAlgError:
        p_gn = None
    if p_gn is not None and np.all(np.isfinite(p_gn)):
        if np.linalg.norm(p_gn) <= radius:
            return p_gn, "gauss-newton"
    jg = jac @ g
    t = gnorm**2 / float(jg @ jg)
    p_sd = -t * g
    sd_norm = float(np.linalg.norm(p_sd))
    if p_gn is None or not np.all(np.isfinite(p_gn)) or sd_norm >= radius:
        return -(radius / gnorm) * g, "cauchy"
    # interpolate between the Cauchy point and the Gauss-Newton point
    d = p_gn - p_sd
    a = float(d @ d)
    b = 2.0 * float(p_sd @ d)
    c = sd_norm**2 - radius**2
    s = (-b + np.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)
    return p_sd + s * d, "dogleg"


def hybrid_root(
    func,
    x0,
    tol: float = 1e-10,
    max_iter: int = 200,
    fd_scale: float | None = None,
    trust_radius: float = 1.0,
    project=None,
) -> RootResult:
    """Find x with max|func(x)| <= tol.

    ``project``, when given, maps trial points back into the admissible set
    before evaluation (the actual step taken is the projected one).
    Convergence is declared on the residual max-norm, not on the merit
    function.
    """
    if fd_scale is None:
        fd_scale = float(np.sqrt(np.finfo(float).eps))
    x = np.asarray(x0, dtype=float).copy()
    if project is not None:
        x = project(x)
    n = x.size
    nfev = 0

    def call(z):
        nonlocal nfev
        nfev += 1
        return np.asarray(func(z), dtype=float)

    f = call(x)
    if n == 0:
        return RootResult(x, f, 0.0, 0, True, "empty system", [], nfev)

    jac = forward_jacobian(call, x, f, fd_scale)
    fresh = True
    radius = float(trust_radius)
    rejects = 0
    trace: list[dict] = []
    norm = float(np.max(np.abs(f)))

    for it in range(1, max_iter + 1):
        if norm <= tol:
            return RootResult(x, f, norm, it - 1, True, "converged", trace, nfev)

        step, step_type = _dogleg(jac, f, radius)
        refreshed = False
        x_trial = x + step
        if project is not None:
            x_trial = project(x_trial)
            step = x_trial - x
        f_trial = call(x_trial)

        merit = 0.5 * float(f @ f)
        predicted = merit - 0.5 * float(np.sum((f + jac @ step) ** 2))
        actual = merit - 0.5 * float(f_trial @ f_trial)
        ratio = actual / predicted if predicted > 0 else -1.0

        accepted = ratio >= _ACCEPT_RATIO and np.all(np.isfinite(f_trial))
        step_norm = float(np.linalg.norm(step))
        if accepted:
            s, y = step, f_trial - f
            ss = float(s @ s)
            if ss > 0:
                jac = jac + np.outer((y - jac @ s) / ss, s)
                fresh = False
            x, f = x_trial, f_trial
            norm = float(np.max(np.abs(f)))
            rejects = 0
        else:
            rejects += 1
            if rejects >= 2 and not fresh:
                jac = forward_jacobian(call, x, f, fd_scale)
                fresh = True
                refreshed = True
                rejects = 0

        if ratio < _LOW:
            radius = max(_SHRINK * min(radius, step_norm), _MIN_RADIUS)
        elif ratio > _HIGH and step_norm >= 0.99 * radius:
            radius *= _GROW

        if not np.all(np.isfinite(jac)) or (
            not fresh and np.linalg.cond(jac) > 1e14
        ):
            jac = forward_jacobian(call, x, f, fd_scale)
            fresh = True
            refreshed = True

        trace.append(
            {
                "iteration": it,
                "residual_max_norm": norm,
                "trust_radius": radius,
                "step_type": step_type,
                "step_accepted": bool(accepted),
                "jacobian_refreshed": refreshed,
            }
        )

        if radius <= _MIN_RADIUS:
            if fresh:
                return RootResult(
                    x, f, norm, it, norm <= tol, "trust region collapsed", trace, nfev
                )
            jac = forward_jacobian(call, x, f, fd_scale)
            fresh = True
            radius = max(radius, 1e-8)

    success = norm <= tol
    msg = "converged" if success else f"no convergence in {max_iter} iterations"
    return RootResult(x, f, norm, max_iter, success, msg, trace, nfev)
