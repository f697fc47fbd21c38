"""
Finite Difference Service
Central differences whose stencil shrinks until both sides stay inside the
function's domain (the objective is nan where the linkage cannot assemble).
"""

import math
from typing import Callable

import numpy as np

# halvings allowed before falling back to a one-sided difference
MAX_SHRINK = 60


def fd_step(x_i: float, rel_step: float) -> float:
    return rel_step * max(abs(x_i), 1.0)


def _finite(v) -> bool:
    return v is not None and math.isfinite(v)


def partial_derivative(f: Callable, x: np.ndarray, i: int, h: float, fx: float = None) -> float:
    """d f / d x_i by central difference, shrinking h to stay in the domain"""
    e = np.zeros_like(x)
    for _ in range(MAX_SHRINK):
        e[i] = h
        fp, fm = f(x + e), f(x - e)
        if _finite(fp) and _finite(fm):
            return (fp - fm) / (2.0 * h)
        # one-sided once the stencil is tiny and only one side is defined
        if h < 1e-12 * max(abs(x[i]), 1.0):
            fx = f(x) if fx is None else fx
            if _finite(fp):
                return (fp - fx) / h
            if _finite(fm):
                return (fx - fm) / h
            break
        h *= 0.5
    return math.nan


def central_gradient(f: Callable, x, rel_step: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    fx = f(x)
    return np.array([partial_derivative(f, x, i, fd_step(x[i], rel_step), fx) for i in range(x.size)])


def central_hessian(f: Callable, x, rel_step: float = 1e-6) -> np.ndarray:
    """Hessian as central differences of the central gradient, symmetrized"""
    x = np.asarray(x, dtype=float)
    n = x.size
    # the outer step is larger so the nested stencil does not cancel to noise
    outer = math.sqrt(rel_step) * 1e-1
    hess = np.zeros((n, n))
    for i in range(n):
        column = None
        h = fd_step(x[i], outer)
        e = np.zeros(n)
        for _ in range(MAX_SHRINK):
            e[i] = h
            gp = central_gradient(f, x + e, rel_step) if _finite(f(x + e)) else None
            gm = central_gradient(f, x - e, rel_step) if _finite(f(x - e)) else None
            if gp is not None and gm is not None and np.all(np.isfinite(gp)) and np.all(np.isfinite(gm)):
                column = (gp - gm) / (2.0 * h)
                break
            h *= 0.5
        hess[:, i] = column if column is not None else np.nan
    return 0.5 * (hess + hess.T)


def richardson_ratio(f: Callable, x, i: int, h: float) -> float:
    """
    (D(h) - D(h/2)) / (D(h/2) - D(h/4)) for central differences D.

    The leading error term is O(h^2), so the ratio tends to 4 at smooth points.
    """
    x = np.asarray(x, dtype=float)
    d1 = partial_derivative(f, x, i, h)
    d2 = partial_derivative(f, x, i, h / 2)
    d3 = partial_derivative(f, x, i, h / 4)
    if d2 == d3:
        return math.inf
    return (d1 - d2) / (d2 - d3)
