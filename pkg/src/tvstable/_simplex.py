"""Shared Nelder-Mead plumbing."""

import numpy as np
from scipy import optimize


def initial_simplex(x0, step: float = 0.05, floor: float = 0.5) -> np.ndarray:
    """Axis-aligned simplex around ``x0`` with relative steps (absolute near zero)."""
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        simplex[i + 1, i] += step * max(abs(x0[i]), floor)
    return simplex


def nelder_mead(fun, x0, max_iter: int, xatol: float, fatol: float):
    return optimize.minimize(
        fun,
        np.asarray(x0, dtype=float),
        method="Nelder-Mead",
        options={
            "maxiter": max_iter,
            "maxfev": 4 * max_iter,
            "xatol": xatol,
            "fatol": fatol,
            "initial_simplex": initial_simplex(x0),
        },
    )
