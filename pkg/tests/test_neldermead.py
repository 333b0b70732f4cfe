import numpy as np
import pytest

from spinopt import nelder_mead


def test_convex_bowl():
    result = nelder_mead(
        lambda x: float(np.sum((x - 3.0) ** 2)),
        np.zeros(3),
        step=0.5,
        f_tol=1e-12,
        max_iter=2000,
    )
    assert result.fun < 1e-8
    np.testing.assert_allclose(result.x, 3.0, atol=1e-4)
    assert result.converged


def test_rosenbrock():
    def rosen(x):
        return float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)

    result = nelder_mead(
        rosen, np.array([-1.2, 1.0]), step=0.1, f_tol=1e-10, max_iter=1000
    )
    assert result.fun < 1e-6
    assert result.n_evals < 500
    np.testing.assert_allclose(result.x, [1.0, 1.0], atol=1e-2)


def test_eval_count_matches_instrumented_calls():
    calls = 0

    def f(x):
        nonlocal calls
        calls += 1
        return float(np.sum(x**2))

    result = nelder_mead(f, np.array([1.0, 2.0]), step=0.3, max_iter=50)
    assert result.n_evals == calls


def test_non_finite_objective_aborts():
    def f(x):
        return np.nan if x[0] > 1.5 else float(x[0] ** 2)

    with pytest.raises(RuntimeError):
        nelder_mead(f, np.array([1.4]), step=0.5, max_iter=100)


def test_iteration_cap():
    # a narrow valley that cannot converge in two iterations
    result = nelder_mead(
        lambda x: float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2),
        np.array([-1.2, 1.0]),
        step=0.1,
        f_tol=1e-14,
        max_iter=2,
    )
    assert not result.converged
    assert result.n_iter == 2
