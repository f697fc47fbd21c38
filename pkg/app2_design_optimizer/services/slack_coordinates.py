"""
Slack Coordinates Service
The design problem re-expressed over z = (l1, l3, l4, l5, l6, r) with
l2 = hypot(l5, l6) - d_min + r^2. The singularity inequality becomes r > 0 and
the knee angle is smooth up to and across the collinear pose, so the barrier
solve can settle on the singular face with finite gradients.
"""

import math

import numpy as np

from app1_linkage_model.kinematics import knee_theta_slack, slack_l2
from app1_linkage_model.problem import DesignProblem, InequalityConstraint
from shared.errors import GeometryInfeasible

from .barrier_service import BarrierTerm

# z index of each x component other than l2
_X_FROM_Z = {0: 0, 2: 1, 3: 2, 4: 3, 5: 4}
R = 5
# ulp nudges allowed when rounding leaves l2 on the singular face
MAX_NUDGE = 64


class SlackCoordinates:

    def __init__(self, problem: DesignProblem):
        self.problem = problem
        self.d_min = problem.d_min
        self._singularity = [c for c in problem.constraints if c.category == "singularity"]

    # -- maps -----------------------------------------------------------

    def to_slack(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        slack = x[1] + self.d_min - math.hypot(x[4], x[5])
        return np.array([x[0], x[2], x[3], x[4], x[5], math.sqrt(max(slack, 0.0))])

    def embed(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return np.array([z[0], slack_l2(z[3], z[4], z[R], self.d_min), z[1], z[2], z[3], z[4]])

    def from_slack(self, z) -> np.ndarray:
        """x for z, with l2 raised by a few ulps if rounding lands it on g_singularity >= 0"""
        x = self.embed(z)
        for _ in range(MAX_NUDGE):
            if all(c(x) < 0.0 for c in self._singularity):
                break
            x[1] = np.nextafter(x[1], math.inf)
        return x

    def jacobian(self, z) -> np.ndarray:
        """dx/dz, 6 x 6"""
        z = np.asarray(z, dtype=float)
        l7 = math.hypot(z[3], z[4])
        J = np.zeros((6, 6))
        for i, j in _X_FROM_Z.items():
            J[i, j] = 1.0
        J[1, 3] = z[3] / l7
        J[1, 4] = z[4] / l7
        J[1, R] = 2.0 * z[R]
        return J

    def l2_hessian(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        l5, l6 = z[3], z[4]
        l7 = math.hypot(l5, l6)
        H = np.zeros((6, 6))
        H[3, 3] = l6 ** 2 / l7 ** 3
        H[4, 4] = l5 ** 2 / l7 ** 3
        H[3, 4] = H[4, 3] = -l5 * l6 / l7 ** 3
        H[R, R] = 2.0
        return H

    # -- objective and constraints ------------------------------------

    def neg_theta(self, z) -> float:
        z = np.asarray(z, dtype=float)
        if np.any(z[:R] <= 0.0):
            return math.nan
        try:
            return -knee_theta_slack(z, self.d_min)
        except GeometryInfeasible:
            return math.nan

    def compose(self, c: InequalityConstraint) -> BarrierTerm:
        """c(x(z)) with chain-rule gradient and Hessian"""
        def g(z):
            return c.g(self.embed(z))

        def grad(z):
            return self.jacobian(z).T @ c.grad(self.embed(z))

        def hess(z):
            x = self.embed(z)
            J = self.jacobian(z)
            return J.T @ c.hess(x) @ J + c.grad(x)[1] * self.l2_hessian(z)

        return BarrierTerm(g, grad, hess)

    def terms(self) -> list[BarrierTerm]:
        """Every non-singularity constraint composed, plus -r < 0"""
        unit_r = np.zeros(6)
        unit_r[R] = -1.0
        positive_r = BarrierTerm(
            g=lambda z: -float(z[R]),
            grad=lambda z: unit_r.copy(),
            hess=lambda z: np.zeros((6, 6)),
        )
        composed = [self.compose(c) for c in self.problem.constraints if c.category != "singularity"]
        return composed + [positive_r]
