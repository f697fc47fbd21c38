"""
Figure Service
Summary plots: knee angle over stroke, objective scans around an optimum,
and human vs exoskeleton gait overlays.
"""

from pathlib import Path
from typing import Sequence

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from shared.config import LINK_NAMES
from shared.errors import IoError
from shared.models import ErrorSeries, PairedSeries, RomPoint, SensitivityScan

from .svg_render_service import SVG_RC


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with matplotlib.rc_context(SVG_RC):
            FigureCanvasSVG(fig)
            fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}")
    return path


def plot_rom_curve(points: Sequence[RomPoint], path, d_min: float = None) -> Path:
    """Knee angle vs stroke length; infeasible strokes leave gaps"""
    d = np.array([p.d_mm for p in points])
    theta = np.array([p.theta_deg for p in points])

    fig = Figure(figsize=(7, 5))
    ax = fig.add_subplot(1, 1, 1)
    ax.plot(d, theta, color="tab:blue", linewidth=1.5)
    if d_min is not None:
        ax.axvline(d_min, color="red", linestyle="--", linewidth=1, label=f"d_min = {d_min:g} mm")
        ax.legend(loc="best")
    ax.set_xlabel("Stroke length d (mm)")
    ax.set_ylabel("Knee joint angle (deg)")
    ax.set_title("Knee joint angle vs stroke length")
    ax.grid(True, linewidth=0.3)
    return _save(fig, path)


def plot_sensitivity_scans(scans: Sequence[SensitivityScan], path) -> Path:
    """One panel per design variable; the optimum sits at offset 0"""
    fig = Figure(figsize=(12, 7))
    for k, scan in enumerate(scans):
        ax = fig.add_subplot(2, 3, k + 1)
        offsets = np.asarray(scan.offsets)
        values = np.asarray(scan.values)
        ax.plot(offsets, values, color="tab:blue", linewidth=1.2)
        centre = int(np.argmin(np.abs(offsets)))
        ax.plot([offsets[centre]], [values[centre]], marker="o", color="red")
        ax.set_xlabel(f"offset along {LINK_NAMES[scan.axis]} (mm)")
        ax.set_ylabel("-theta (deg)")
        ax.grid(True, linewidth=0.3)
    fig.suptitle("Objective around the optimal solution")
    fig.tight_layout()
    return _save(fig, path)


def plot_gait_comparison(pairs: PairedSeries, errors: ErrorSeries, path, ylabel: str = "Knee angle (deg)") -> Path:
    """Overlay of both signals over normalized progress with the relative error below"""
    fig = Figure(figsize=(8, 7))
    top = fig.add_subplot(2, 1, 1)
    if pairs.human.ndim == 2:
        top.plot(pairs.human[:, 0], pairs.human[:, 1], label="human", color="tab:blue")
        top.plot(pairs.exo[:, 0], pairs.exo[:, 1], label="exoskeleton", color="tab:orange", linestyle="--")
        top.set_xlabel("x")
        top.set_ylabel("y")
        top.set_aspect("equal", adjustable="datalim")
    else:
        top.plot(pairs.s, pairs.human, label="human", color="tab:blue")
        top.plot(pairs.s, pairs.exo, label="exoskeleton", color="tab:orange", linestyle="--")
        top.set_xlabel("progress s")
        top.set_ylabel(ylabel)
    top.legend(loc="best")
    top.set_title("Motion analysis comparison")
    top.grid(True, linewidth=0.3)

    bottom = fig.add_subplot(2, 1, 2)
    bottom.plot(errors.s, errors.relative_error, color="tab:red")
    bottom.set_xlabel("progress s")
    bottom.set_ylabel("relative error")
    bottom.set_title(f"median {errors.median:.4f}   max {errors.max:.4f}")
    bottom.grid(True, linewidth=0.3)
    fig.tight_layout()
    return _save(fig, path)
