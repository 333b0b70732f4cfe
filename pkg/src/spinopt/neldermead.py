"""Nelder-Mead downhill simplex minimizer.

Plain implementation with the standard reflection/expansion/contraction/
shrink coefficients (1, 2, 0.5, 0.5).  The search stops when the spread of
the simplex function values falls below ``f_tol`` or after ``max_iter``
iterations (default 200 per dimension).  Every objective call is counted.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class NMResult:
    x: np.ndarray
    fun: float
    n_evals: int
    n_iter: int
    converged: bool


def nelder_mead(fn, x0, step, f_tol: float = 1e-4, max_iter: int | None = None) -> NMResult:
    """Minimize ``fn`` from ``x0`` with per-coordinate initial steps ``step``.

    Raises RuntimeError if the objective returns a non-finite value.
    """
    x0 = np.asarray(x0, dtype=float)
    dim = x0.size
    step = np.broadcast_to(np.asarray(step, dtype=float), (dim,))
    if max_iter is None:
        max_iter = 200 * dim

    evals = 0

    def call(x):
        nonlocal evals
        evals += 1
        value = float(fn(x))
        if not np.isfinite(value):
            raise RuntimeError(
                f"objective returned non-finite value {value} at x={x.tolist()}"
            )
        return value

    simplex = np.empty((dim + 1, dim))
    simplex[0] = x0
    for i in range(dim):
        simplex[i + 1] = x0
        simplex[i + 1, i] += step[i]
    values = np.array([call(v) for v in simplex])

    n_iter = 0
    converged = False
    while n_iter < max_iter:
        order = np.argsort(values, kind="stable")
        simplex = simplex[order]
        values = values[order]
        if values[-1] - values[0] < f_tol:
            converged = True
            break
        n_iter += 1

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        reflected = centroid + (centroid - worst)
        f_ref = call(reflected)
        if f_ref < values[0]:
            expanded = centroid + 2.0 * (centroid - worst)
            f_exp = call(expanded)
            if f_exp < f_ref:
                simplex[-1], values[-1] = expanded, f_exp
            else:
                simplex[-1], values[-1] = reflected, f_ref
            continue
        if f_ref < values[-2]:
            simplex[-1], values[-1] = reflected, f_ref
            continue
        if f_ref < values[-1]:
            contracted = centroid + 0.5 * (reflected - centroid)
        else:
            contracted = centroid - 0.5 * (centroid - worst)
        f_con = call(contracted)
        if f_con < min(f_ref, values[-1]):
            simplex[-1], values[-1] = contracted, f_con
            continue
        # Shrink toward the best vertex.
        for i in range(1, dim + 1):
            simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
            values[i] = call(simplex[i])

    best = int(np.argmin(values))
    return NMResult(
        x=simplex[best].copy(),
        fun=float(values[best]),
        n_evals=evals,
        n_iter=n_iter,
        converged=converged,
    )
