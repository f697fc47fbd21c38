"""
Report Service
Text report plus constraint and barrier-trace CSVs for a SolveReport.
"""

from pathlib import Path

import pandas as pd

from shared.config import LINK_NAMES
from shared.errors import IoError
from shared.models import SolveReport


def _write(path: Path, writer) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        writer(path)
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}")
    return path


def render_text_report(report: SolveReport, theta_initial: float = None) -> str:
    lines = [
        "Knee exoskeleton design optimization",
        "=" * 40,
        f"status            : {report.status}",
        f"theta* (deg)      : {report.theta_star:.6f}",
        f"theta start (deg) : {report.theta_start:.6f}",
    ]
    if theta_initial is not None:
        gain = 100.0 * (report.theta_star - theta_initial) / theta_initial
        lines.append(f"theta initial     : {theta_initial:.6f}  (gain {gain:+.1f} %)")
    lines += [
        f"KKT residual      : {report.kkt_residual:.3e}",
        f"barrier stages    : {len(report.mu_trace)}  inner iterations {sum(report.stage_iterations)}",
        "",
        f"{'link':<6}{'start_mm':>14}{'optimum_mm':>14}",
    ]
    for name, a, b in zip(LINK_NAMES, report.x_start.values, report.x_star.values):
        lines.append(f"{name:<6}{a:>14.4f}{b:>14.4f}")
    lines += ["", "active constraints: " + (", ".join(report.active_labels) or "none")]
    return "\n".join(lines) + "\n"


def write_text_report(report: SolveReport, path, theta_initial: float = None) -> Path:
    text = render_text_report(report, theta_initial)
    return _write(Path(path), lambda p: p.write_text(text))


def write_constraint_csv(report: SolveReport, path) -> Path:
    # value is g(x) = -slack
    frame = pd.DataFrame({
        "constraint_label": list(report.slacks),
        "value": [-s for s in report.slacks.values()],
        "active_flag": [int(report.active[label]) for label in report.slacks],
    })
    return _write(Path(path), lambda p: frame.to_csv(p, index=False, float_format="%.17g"))


def write_trace_csv(report: SolveReport, path) -> Path:
    frame = pd.DataFrame({
        "stage": range(len(report.mu_trace)),
        "mu": report.mu_trace,
        "theta_deg": report.stage_theta,
        "kkt_residual": report.stage_kkt,
    })
    return _write(Path(path), lambda p: frame.to_csv(p, index=False, float_format="%.17g"))
