"""
Barrier Service
Log-barrier interior-point method: barrier continuation over mu with damped
Newton inner iterations and a feasibility-keeping Armijo backtracking search.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from shared.models import BarrierParams

# regularization lambda*I starts here and doubles until the step is a descent direction
REGULARIZATION_START = 1e-8
REGULARIZATION_MAX = 1e12
MAX_BACKTRACKS = 80


@dataclass(frozen=True)
class BarrierTerm:
    """One inequality g(z) < 0 with its gradient and Hessian"""
    g: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]


@dataclass
class StageResult:
    mu: float
    x: np.ndarray
    iterations: int
    gradient_norm: float
    exhausted: bool
    stopped_early: bool = False
    # line search floored before the inner tolerances were met
    stalled: bool = False
    merits: list[float] = field(default_factory=list)


class NewtonBarrierSolver:
    """Minimize f(z) + mu * sum(-log(-g_i(z))) for a decreasing sequence of mu"""

    def __init__(
        self,
        objective: Callable[[np.ndarray], float],
        gradient: Callable[[np.ndarray], np.ndarray],
        hessian: Callable[[np.ndarray], np.ndarray],
        terms: Sequence[BarrierTerm],
        params: BarrierParams = BarrierParams(),
    ):
        self.objective = objective
        self.gradient = gradient
        self.hessian = hessian
        self.terms = list(terms)
        self.params = params

    # -- barrier pieces ---------------------------------------------------

    def constraint_values(self, z: np.ndarray) -> np.ndarray:
        return np.array([t.g(z) for t in self.terms])

    def strictly_feasible(self, z: np.ndarray) -> bool:
        return bool(np.all(self.constraint_values(z) < 0.0))

    def merit(self, z: np.ndarray, mu: float) -> float:
        g = self.constraint_values(z)
        if np.any(g >= 0.0):
            return math.inf
        f = self.objective(z)
        if not math.isfinite(f):
            return math.inf
        return f - mu * float(np.sum(np.log(-g)))

    def merit_gradient(self, z: np.ndarray, mu: float) -> np.ndarray:
        grad = np.array(self.gradient(z), dtype=float)
        for t in self.terms:
            grad += mu * t.grad(z) / (-t.g(z))
        return grad

    def merit_hessian(self, z: np.ndarray, mu: float) -> np.ndarray:
        hess = np.array(self.hessian(z), dtype=float)
        for t in self.terms:
            gi = t.g(z)
            dg = t.grad(z)
            hess += mu * (np.outer(dg, dg) / gi ** 2 + t.hess(z) / (-gi))
        return hess

    # -- inner Newton -----------------------------------------------------

    def newton_direction(self, hess: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Newton step, adding lambda*I when the Hessian is not positive definite"""
        n = grad.size
        if not np.all(np.isfinite(hess)):
            return -grad
        lam = 0.0
        while lam <= REGULARIZATION_MAX:
            try:
                factor = scipy.linalg.cho_factor(hess + lam * np.eye(n))
                step = -scipy.linalg.cho_solve(factor, grad)
                if float(grad @ step) < 0.0:
                    return step
            except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
                pass
            lam = REGULARIZATION_START if lam == 0.0 else 2.0 * lam
        return -grad

    def line_search(self, z: np.ndarray, mu: float, merit0: float, grad: np.ndarray, step: np.ndarray):
        """Armijo backtracking that only accepts strictly feasible trial points"""
        slope = float(grad @ step)
        t = 1.0
        for _ in range(MAX_BACKTRACKS):
            trial = z + t * step
            value = self.merit(trial, mu)
            if math.isfinite(value) and value <= merit0 + self.params.armijo_c * t * slope:
                return t, trial, value
            t *= self.params.backtrack
        return 0.0, z, merit0

    def run_stage(self, z0: np.ndarray, mu: float, stop_when: Optional[Callable] = None) -> StageResult:
        z = np.array(z0, dtype=float)
        merit = self.merit(z, mu)
        if not math.isfinite(merit):
            raise ValueError("barrier stage needs a strictly feasible start")
        merits = [merit]
        grad_norm = math.inf
        for iteration in range(1, self.params.max_inner + 1):
            grad = self.merit_gradient(z, mu)
            grad_norm = float(np.linalg.norm(grad))
            if not math.isfinite(grad_norm):
                return StageResult(mu, z, iteration - 1, grad_norm, False, stalled=True, merits=merits)
            if grad_norm <= self.params.inner_tol:
                return StageResult(mu, z, iteration - 1, grad_norm, False, merits=merits)

            step = self.newton_direction(self.merit_hessian(z, mu), grad)
            decrement_sq = -float(grad @ step)
            if decrement_sq / 2.0 <= self.params.inner_tol:
                return StageResult(mu, z, iteration - 1, grad_norm, False, merits=merits)

            t, trial, value = self.line_search(z, mu, merit, grad, step)
            if t == 0.0 or value >= merit - 1e-15 * (1.0 + abs(merit)):
                # numerical floor: no representable step lowers the merit further
                if t > 0.0:
                    z, merit = trial, value
                    merits.append(merit)
                return StageResult(mu, z, iteration, grad_norm, False, stalled=True, merits=merits)

            assert self.strictly_feasible(trial), "accepted iterate left the strict interior"
            z, merit = trial, value
            merits.append(merit)
            if stop_when is not None and stop_when(z):
                return StageResult(mu, z, iteration, grad_norm, False, stopped_early=True, merits=merits)
        return StageResult(mu, z, self.params.max_inner, grad_norm, True, merits=merits)

    # -- continuation -----------------------------------------------------

    def mu_schedule(self) -> list[float]:
        p = self.params
        count = int(math.floor(math.log(p.mu0 / p.mu_min) / math.log(1.0 / p.mu_shrink) + 1e-9)) + 1
        return [p.mu0 * p.mu_shrink ** k for k in range(max(count, 1))]

    def minimize(self, z0: np.ndarray, stop_when: Optional[Callable] = None) -> list[StageResult]:
        stages = []
        z = np.array(z0, dtype=float)
        for mu in self.mu_schedule():
            result = self.run_stage(z, mu, stop_when)
            stages.append(result)
            z = result.x
            if result.stopped_early:
                break
        return stages
