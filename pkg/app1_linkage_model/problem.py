"""
Linkage Model: Design Problem
Maximize the knee angle at minimum stroke under Grashof, ordering,
thigh-proportion, singularity and anthropometric bound constraints.
All constraints use the g(x) < 0 feasible convention.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from shared.config import DEFAULT_LOWER, DEFAULT_UPPER, D_MIN_MM, FEASIBILITY_EPS, LINK_NAMES
from shared.errors import GeometryInfeasible, InvalidBounds
from shared.models import LinkSet, ProblemConfig

from .kinematics import knee_angle, knee_theta

Category = Literal["grashof", "ordering", "proportion", "singularity", "bound"]


def _linear(coefficients: dict[int, float], constant: float = 0.0):
    """g(x) = a.x + c with constant gradient and zero Hessian"""
    a = np.zeros(6)
    for index, value in coefficients.items():
        a[index] = value

    def g(x):
        return float(a @ x) + constant

    def grad(x):
        return a.copy()

    def hess(x):
        return np.zeros((6, 6))

    return g, grad, hess


@dataclass(frozen=True)
class InequalityConstraint:
    label: str
    category: Category
    g: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x) -> float:
        return self.g(np.asarray(x, dtype=float))

    def scaled(self, factor: float) -> "InequalityConstraint":
        if factor <= 0:
            raise ValueError("constraint scale must be positive")
        return InequalityConstraint(
            label=self.label,
            category=self.category,
            g=lambda x: factor * self.g(x),
            grad=lambda x: factor * self.grad(x),
            hess=lambda x: factor * self.hess(x),
        )


def _singularity(d_min: float):
    """g = sqrt(l5^2 + l6^2) - l2 - d_min"""
    def g(x):
        return math.hypot(x[4], x[5]) - x[1] - d_min

    def grad(x):
        l7 = math.hypot(x[4], x[5])
        out = np.zeros(6)
        out[1] = -1.0
        out[4] = x[4] / l7
        out[5] = x[5] / l7
        return out

    def hess(x):
        l7 = math.hypot(x[4], x[5])
        h = np.zeros((6, 6))
        h[4, 4] = x[5] ** 2 / l7 ** 3
        h[5, 5] = x[4] ** 2 / l7 ** 3
        h[4, 5] = h[5, 4] = -x[4] * x[5] / l7 ** 3
        return h

    return g, grad, hess


@dataclass(frozen=True)
class DesignProblem:
    d_min: float
    lower: np.ndarray
    upper: np.ndarray
    constraints: tuple[InequalityConstraint, ...] = field(default_factory=tuple)

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.constraints]

    def functional(self) -> list[InequalityConstraint]:
        return [c for c in self.constraints if c.category != "bound"]

    def evaluate(self, x) -> dict[str, float]:
        x = np.asarray(x, dtype=float)
        return {c.label: c(x) for c in self.constraints}

    def values(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([c(x) for c in self.constraints])

    def strictly_feasible(self, x, eps: float = 0.0) -> bool:
        """All g(x) < -eps"""
        return bool(np.all(self.values(x) < -eps))

    def is_feasible(self, x) -> bool:
        """Feasibility for reporting: every g(x) <= -eps_feas"""
        return self.strictly_feasible(x, FEASIBILITY_EPS)

    def with_scaled_constraints(self, factor: float) -> "DesignProblem":
        return DesignProblem(
            d_min=self.d_min,
            lower=self.lower,
            upper=self.upper,
            constraints=tuple(c.scaled(factor) for c in self.constraints),
        )


def build_problem(config: Optional[ProblemConfig] = None) -> DesignProblem:
    """Register the 9 functional and 12 bound inequalities"""
    config = config or ProblemConfig()
    lower = np.array(config.lower, dtype=float)
    upper = np.array(config.upper, dtype=float)
    if config.d_min_mm <= 0:
        raise InvalidBounds(f"d_min_mm must be positive, got {config.d_min_mm}")
    if lower.shape != (6,) or upper.shape != (6,):
        raise InvalidBounds("bounds need exactly six entries")
    for i, name in enumerate(LINK_NAMES):
        if lower[i] <= 0:
            raise InvalidBounds(f"lb.{name} must be positive (got {lower[i]})")
        if lower[i] >= upper[i]:
            raise InvalidBounds(f"lb.{name} = {lower[i]} is not below ub.{name} = {upper[i]}")

    L1, L2, L3, L4, L5, L6 = range(6)
    functional = [
        ("grashof", "grashof", {L3: 1, L4: 1, L2: -1, L1: -1}),
        ("ordering.l3_lt_l2", "ordering", {L3: 1, L2: -1}),
        ("ordering.l3_lt_l1", "ordering", {L3: 1, L1: -1}),
        ("ordering.l3_lt_l4", "ordering", {L3: 1, L4: -1}),
        ("ordering.l2_lt_l4", "ordering", {L2: 1, L4: -1}),
        ("ordering.l1_lt_l4", "ordering", {L1: 1, L4: -1}),
        ("proportion.l5_lt_l6", "proportion", {L5: 1, L6: -1}),
        ("proportion.l4_lt_l6", "proportion", {L4: 1, L6: -1}),
    ]
    constraints = [
        InequalityConstraint(label, category, *_linear(coeffs))
        for label, category, coeffs in functional
    ]
    constraints.append(InequalityConstraint("singularity", "singularity", *_singularity(config.d_min_mm)))

    for i, name in enumerate(LINK_NAMES):
        constraints.append(InequalityConstraint(f"bound.lb.{name}", "bound", *_linear({i: -1.0}, lower[i])))
        constraints.append(InequalityConstraint(f"bound.ub.{name}", "bound", *_linear({i: 1.0}, -upper[i])))

    return DesignProblem(d_min=config.d_min_mm, lower=lower, upper=upper, constraints=tuple(constraints))


def default_problem() -> DesignProblem:
    return build_problem(ProblemConfig(d_min_mm=D_MIN_MM, lower=DEFAULT_LOWER, upper=DEFAULT_UPPER))


def objective_value(problem: DesignProblem, x) -> float:
    """theta(x) in degrees at d = d_min; GeometryInfeasible propagates"""
    return knee_angle(LinkSet.from_sequence(x), problem.d_min).theta_deg


def safe_objective(problem: DesignProblem, x) -> float:
    """theta(x), or nan where the linkage cannot be assembled"""
    try:
        if np.any(np.asarray(x) <= 0):
            return math.nan
        return knee_theta(x, problem.d_min)
    except GeometryInfeasible:
        return math.nan
