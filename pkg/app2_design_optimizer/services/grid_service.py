"""
Grid Service
Brute-force lattice oracle over the variable bounds box.
"""

import itertools
import math

import numpy as np

from app1_linkage_model.problem import DesignProblem, safe_objective
from shared.errors import NoFeasibleGridPoint


def lattice_axes(problem: DesignProblem, resolution: int) -> list[np.ndarray]:
    return [np.linspace(lo, hi, resolution) for lo, hi in zip(problem.lower, problem.upper)]


def grid_feasible(problem: DesignProblem, x: np.ndarray) -> bool:
    """Functional constraints strictly (g < 0); bounds closed, since lattice points sit on them"""
    for c in problem.constraints:
        value = c(x)
        if c.category == "bound":
            if value > 0.0:
                return False
        elif value >= 0.0:
            return False
    return True


def grid_search(problem: DesignProblem, resolution: int) -> tuple[np.ndarray, float]:
    """Best feasible lattice point and its theta; ties keep the lowest lattice index"""
    if resolution < 2:
        raise ValueError("grid_search needs resolution >= 2")
    best_x, best_theta = None, -math.inf
    for point in itertools.product(*lattice_axes(problem, resolution)):
        x = np.array(point)
        if not grid_feasible(problem, x):
            continue
        theta = safe_objective(problem, x)
        if math.isfinite(theta) and theta > best_theta:
            best_x, best_theta = x, theta
    if best_x is None:
        raise NoFeasibleGridPoint(f"no feasible point on the {resolution}^6 lattice")
    return best_x, best_theta
