#!/usr/bin/env python3
"""
App 2: Design Optimizer
Phase-I feasibility, log-barrier interior-point solve, and local
sensitivity scans for the knee-exoskeleton design problem.
"""

import argparse
import math
import sys
from pathlib import Path
from typing import Optional

# Add parent to path for shared imports
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
from scipy import optimize

from app1_linkage_model.problem import DesignProblem, default_problem, safe_objective
from shared.config import LINK_NAMES, OUTPUT_DIR, PHASE_ONE_MARGIN, REFERENCE_START
from shared.console import log, out
from shared.errors import ExoKneeError, InfeasibleStartUnrecoverable
from shared.models import BarrierParams, DesignVector, SensitivityScan, SolveReport
from app2_design_optimizer.services.barrier_service import BarrierTerm, NewtonBarrierSolver
from app2_design_optimizer.services.finite_difference import central_gradient, central_hessian
from app2_design_optimizer.services.report_service import (
    render_text_report, write_constraint_csv, write_text_report, write_trace_csv,
)
from app2_design_optimizer.services.slack_coordinates import SlackCoordinates

# slack (in constraint units) under which a constraint is reported active
ACTIVE_TOL = 1e-3
KKT_TOL = 1e-4
SLACK_TOL = 1e-6


class DesignOptimizer:
    """Maximize the knee angle at d_min over the six link lengths"""

    def __init__(self, problem: DesignProblem, params: BarrierParams = BarrierParams(), verbose: bool = False):
        self.problem = problem
        self.params = params
        self.verbose = verbose

    # -- objective in minimized form ------------------------------------

    def neg_theta(self, x: np.ndarray) -> float:
        theta = safe_objective(self.problem, x)
        return -theta if math.isfinite(theta) else math.nan

    def neg_theta_gradient(self, x: np.ndarray) -> np.ndarray:
        return central_gradient(self.neg_theta, x, self.params.fd_step_rel)

    def neg_theta_hessian(self, x: np.ndarray) -> np.ndarray:
        return central_hessian(self.neg_theta, x, self.params.fd_step_rel)

    def _terms(self) -> list[BarrierTerm]:
        return [BarrierTerm(c.g, c.grad, c.hess) for c in self.problem.constraints]

    # -- phase I --------------------------------------------------------

    def _strictly_interior(self, x: np.ndarray) -> bool:
        return (
            bool(np.all(self.problem.values(x) <= -PHASE_ONE_MARGIN))
            and math.isfinite(self.neg_theta(x))
        )

    def phase_one(self, x0) -> np.ndarray:
        """Strictly feasible point from x0 by minimizing max_i g_i(x)"""
        x0 = np.clip(np.asarray(x0, dtype=float), self.problem.lower, self.problem.upper)
        if self._strictly_interior(x0):
            return x0

        # minimize t subject to g_i(x) - t < 0 over z = (x, t)
        def lifted(c):
            return BarrierTerm(
                g=lambda z: c.g(z[:6]) - z[6],
                grad=lambda z: np.append(c.grad(z[:6]), -1.0),
                hess=lambda z: np.pad(c.hess(z[:6]), ((0, 1), (0, 1))),
            )

        unit_t = np.zeros(7)
        unit_t[6] = 1.0
        solver = NewtonBarrierSolver(
            objective=lambda z: z[6],
            gradient=lambda z: unit_t.copy(),
            hessian=lambda z: np.zeros((7, 7)),
            terms=[lifted(c) for c in self.problem.constraints],
            params=self.params,
        )
        t0 = float(np.max(self.problem.values(x0))) + 1.0
        z0 = np.append(x0, t0)
        stages = solver.minimize(z0, stop_when=lambda z: self._strictly_interior(z[:6]))
        x = stages[-1].x[:6]
        if not self._strictly_interior(x):
            raise InfeasibleStartUnrecoverable(
                f"max constraint value stays at {np.max(self.problem.values(x)):.3g} after phase I"
            )
        if self.verbose:
            log(f"🔧 Phase I: strictly feasible start after {sum(s.iterations for s in stages)} steps")
        return x

    # -- KKT ----------------------------------------------------------

    def kkt_residual(self, x: np.ndarray) -> float:
        """
        Scaled stationarity ||grad f + sum lambda_i grad g_i|| / max(1, ||grad f||)
        with nonnegative multipliers fitted over the near-active constraints,
        measured in slack coordinates where the singular face is smooth.
        """
        coords = SlackCoordinates(self.problem)
        return self._slack_kkt(coords, coords.to_slack(x))

    def _slack_kkt(self, coords: SlackCoordinates, z: np.ndarray) -> float:
        grad_f = central_gradient(coords.neg_theta, z, self.params.fd_step_rel)
        if not np.all(np.isfinite(grad_f)):
            return math.inf
        active = [t for t in coords.terms() if -t.g(z) <= ACTIVE_TOL]
        if active:
            A = np.column_stack([t.grad(z) for t in active])
            _, residual = optimize.nnls(A, -grad_f)
        else:
            residual = float(np.linalg.norm(grad_f))
        return float(residual) / max(1.0, float(np.linalg.norm(grad_f)))

    # -- solve ----------------------------------------------------------

    def solve(self, x0) -> SolveReport:
        """phase_one, then barrier continuation on -theta in slack coordinates"""
        x_start = self.phase_one(x0)
        theta_start = -self.neg_theta(x_start)
        coords = SlackCoordinates(self.problem)
        solver = NewtonBarrierSolver(
            objective=coords.neg_theta,
            gradient=lambda z: central_gradient(coords.neg_theta, z, self.params.fd_step_rel),
            hessian=lambda z: central_hessian(coords.neg_theta, z, self.params.fd_step_rel),
            terms=coords.terms(),
            params=self.params,
        )

        z = coords.to_slack(x_start)
        x = x_start
        stage_iterations, mu_trace, stage_theta, stage_kkt = [], [], [], []
        exhausted = stalled = False
        for mu in solver.mu_schedule():
            stage = solver.run_stage(z, mu)
            z = stage.x
            x = coords.from_slack(z)
            exhausted, stalled = stage.exhausted, stage.stalled
            stage_iterations.append(stage.iterations)
            mu_trace.append(mu)
            stage_theta.append(-self.neg_theta(x))
            stage_kkt.append(self._slack_kkt(coords, z))
            if self.verbose:
                flag = "  (stalled)" if stage.stalled else ""
                log(f"   mu={mu:.1e}  iters={stage.iterations:3d}  theta={stage_theta[-1]:.6f} deg{flag}")

        values = self.problem.evaluate(x)
        slacks = {label: -value for label, value in values.items()}
        kkt = stage_kkt[-1]
        reached_floor = mu_trace[-1] <= self.params.mu_min * (1.0 + 1e-9)
        converged = (
            reached_floor
            and not exhausted
            and not stalled
            and kkt <= KKT_TOL
            and min(slacks.values()) >= -SLACK_TOL
        )
        return SolveReport(
            x_start=DesignVector.from_array(x_start),
            x_star=DesignVector.from_array(x),
            theta_start=theta_start,
            theta_star=-self.neg_theta(x),
            stage_iterations=stage_iterations,
            mu_trace=mu_trace,
            stage_theta=stage_theta,
            stage_kkt=stage_kkt,
            kkt_residual=kkt,
            slacks=slacks,
            active={label: slack <= ACTIVE_TOL for label, slack in slacks.items()},
            status="converged" if converged else "max_iter",
        )

    # -- local scans ----------------------------------------------------

    def sensitivity_scan(self, x_star, axis, span_mm: float, n: int) -> SensitivityScan:
        """-theta along x* + t * direction, t evenly spanning [-span, span]"""
        if n < 1 or n % 2 == 0:
            raise ValueError("sensitivity_scan needs an odd number of points")
        x_star = np.asarray(x_star, dtype=float)
        if isinstance(axis, (int, np.integer)):
            direction = np.zeros(6)
            direction[int(axis)] = 1.0
            axis_index = int(axis)
        else:
            direction = np.asarray(axis, dtype=float)
            direction = direction / np.linalg.norm(direction)
            axis_index = -1

        offsets = np.linspace(-span_mm, span_mm, n) if n > 1 else np.zeros(1)
        offsets[n // 2] = 0.0
        values, feasible = [], []
        for t in offsets:
            x = x_star + t * direction
            theta = safe_objective(self.problem, x)
            ok = self.problem.strictly_feasible(x) and math.isfinite(theta)
            feasible.append(bool(ok))
            values.append(-theta if ok else math.nan)
        return SensitivityScan(
            axis=axis_index,
            direction=tuple(float(v) for v in direction),
            offsets=[float(t) for t in offsets],
            values=values,
            feasible=feasible,
        )


def link_table(x) -> str:
    rows = [f"{'link':<6}{'length_mm':>14}"]
    rows += [f"{name:<6}{value:>14.4f}" for name, value in zip(LINK_NAMES, x)]
    return "\n".join(rows)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Maximize the knee angle at d_min over the default bounds")
    parser.add_argument("--start", type=float, nargs=6, metavar="L", help="Start lengths l1..l6 (default: reference start)")
    parser.add_argument("--output", "-o", type=str, help="Report directory")
    parser.add_argument("--verbose", "-v", action="store_true", help="Per-stage solver progress")
    args = parser.parse_args(argv)

    out_dir = Path(args.output) if args.output else OUTPUT_DIR / "optimize"
    try:
        report = DesignOptimizer(default_problem(), verbose=args.verbose).solve(args.start or REFERENCE_START)
        write_text_report(report, out_dir / "report.txt")
        write_constraint_csv(report, out_dir / "constraints.csv")
        write_trace_csv(report, out_dir / "trace.csv")
    except ExoKneeError as e:
        log(f"❌ Error: {e}")
        return e.exit_code

    out(render_text_report(report).rstrip())
    log(f"💾 Saved to: {out_dir}")
    return 0 if report.status == "converged" else 2


if __name__ == "__main__":
    sys.exit(main())
