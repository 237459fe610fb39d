import numpy as np
import pytest

from cityeq.hybrid import forward_jacobian, hybrid_root


def test_linear_system():
    a = np.array([[3.0, 1.0], [1.0, 2.0]])
    b = np.array([5.0, 5.0])
    res = hybrid_root(lambda x: a @ x - b, np.zeros(2), tol=1e-12)
    assert res.success
    assert np.allclose(res.x, np.linalg.solve(a, b), atol=1e-10)


def test_nonlinear_2d():
    # intersection of a circle and an exponential curve
    def f(x):
        return np.array([x[0] ** 2 + x[1] ** 2 - 4.0, np.exp(x[0]) - x[1] - 1.0])

    res = hybrid_root(f, np.array([1.0, 1.0]), tol=1e-12)
    assert res.success
    assert np.max(np.abs(f(res.x))) <= 1e-12


def test_powell_singular_like_problem():
    # classic hard case: singular Jacobian at the root
    def f(x):
        return np.array(
            [
                x[0] + 10 * x[1],
                np.sqrt(5.0) * (x[2] - x[3]),
                (x[1] - 2 * x[2]) ** 2,
                np.sqrt(10.0) * (x[0] - x[3]) ** 2,
            ]
        )

    res = hybrid_root(f, np.array([3.0, -1.0, 0.0, 1.0]), tol=1e-8, max_iter=500)
    assert np.max(np.abs(f(res.x))) <= 1e-6  # converges slowly but surely


def test_trace_records_step_types():
    def f(x):
        return np.array([np.tanh(x[0]) - 0.5, x[1] ** 3 - 8.0])

    res = hybrid_root(f, np.array([4.0, 4.0]), tol=1e-12, trust_radius=0.5)
    assert res.success
    kinds = {t["step_type"] for t in res.trace}
    assert kinds <= {"gauss-newton", "cauchy", "dogleg"}
    for t in res.trace:
        assert set(t) == {
            "iteration",
            "residual_max_norm",
            "trust_radius",
            "step_type",
            "step_accepted",
            "jacobian_refreshed",
        }
    norms = [t["residual_max_norm"] for t in res.trace]
    assert norms[-1] <= norms[0]


def test_projection_keeps_iterates_admissible():
    seen = []

    def f(x):
        seen.append(x.copy())
        return np.array([np.exp(x[0]) - 100.0])

    res = hybrid_root(
        f, np.array([0.0]), tol=1e-10, project=lambda x: np.clip(x, -2.0, 10.0)
    )
    assert res.success
    assert all(-2.0 <= x[0] <= 10.0 for x in seen)


def test_failure_reports_best_iterate():
    def f(x):
        return np.array([x[0] ** 2 + 1.0])  # no real root

    res = hybrid_root(f, np.array([2.0]), tol=1e-10, max_iter=50)
    assert not res.success
    assert np.isfinite(res.residual_norm)
    assert len(res.trace) >= 1


def test_determinism():
    def f(x):
        return np.array([x[0] ** 3 - x[1], np.cos(x[0]) - x[1] ** 2])

    a = hybrid_root(f, np.array([0.7, 0.7]), tol=1e-13)
    b = hybrid_root(f, np.array([0.7, 0.7]), tol=1e-13)
    assert np.array_equal(a.x, b.x)
    assert a.iterations == b.iterations


def test_forward_jacobian_accuracy():
    def f(x):
        return np.array([x[0] ** 2 * x[1], np.sin(x[1])])

    x = np.array([1.5, 0.8])
    jac = forward_jacobian(f, x, f(x), 1e-8)
    expected = np.array(
        [[2 * x[0] * x[1], x[0] ** 2], [0.0, np.cos(x[1])]]
    )
    assert np.allclose(jac, expected, atol=1e-6)
