"""
SVG Render Service
One vector drawing per simulation frame plus an index, byte-stable for
identical inputs (fixed hash salt, no date metadata, fixed canvas).
"""

from pathlib import Path

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from shared.config import ACTUATOR_CYLINDER_MM, CANVAS_UNITS
from shared.errors import IoError
from shared.models import Frame, FrameSeries, JointLayout

SVG_RC = {"svg.hashsalt": "exoknee-frames", "svg.fonttype": "none", "path.simplify": False}
FIGURE_INCHES = CANVAS_UNITS / 72.0  # SVG user units are points


class FrameRenderer:
    """Draw exoskeleton poses in the ankle frame"""

    def __init__(self, cylinder_mm: float = ACTUATOR_CYLINDER_MM):
        self.cylinder_mm = cylinder_mm

    @staticmethod
    def view_box(frames: FrameSeries) -> tuple[float, float, float, float]:
        """Square viewport centered on the knee pivot, sized from the first feasible frame"""
        first = frames.feasible_frames()[0].layout
        knee = np.asarray(first.knee_pivot)
        points = np.array([
            first.joint1, first.joint2, first.joint3, first.joint4, first.thigh_end, first.actuator_base,
        ])
        links = frames.links
        # every joint stays on a rigid body hinged at the knee or on the coupler
        radius = max(np.max(np.linalg.norm(points - knee, axis=1)), links.l1 + links.l4) * 1.1
        return knee[0] - radius, knee[0] + radius, knee[1] - radius, knee[1] + radius

    def draw(self, ax, frame: Frame, view) -> None:
        lay: JointLayout = frame.layout
        xmin, xmax, ymin, ymax = view

        def seg(a, b, **kw):
            ax.plot([a[0], b[0]], [a[1], b[1]], solid_capstyle="round", **kw)

        # quadrilateral l1..l4 and the thigh extension l6 + offset l5
        seg(lay.joint4, lay.joint1, color="black", linewidth=3)
        seg(lay.joint1, lay.joint2, color="black", linewidth=3)
        seg(lay.joint2, lay.joint3, color="black", linewidth=3)
        seg(lay.joint3, lay.joint4, color="dimgray", linewidth=4)
        seg(lay.joint2, lay.thigh_end, color="black", linewidth=3)
        seg(lay.thigh_end, lay.actuator_base, color="black", linewidth=3)

        # actuator: cylinder from the mount, piston to joint 1
        base, tip = np.asarray(lay.actuator_base), np.asarray(lay.joint1)
        axis = tip - base
        length = float(np.linalg.norm(axis))
        split = base + axis * min(1.0, self.cylinder_mm / length)
        seg(base, split, color="red", linewidth=7)
        seg(split, tip, color="black", linewidth=2)

        for p in (lay.joint1, lay.joint2, lay.joint4, lay.thigh_end, lay.actuator_base):
            ax.plot([p[0]], [p[1]], marker="o", markersize=4, color="black")
        ax.plot([lay.joint3[0]], [lay.joint3[1]], marker="o", markersize=14,
                markerfacecolor="none", markeredgecolor="red", markeredgewidth=2)

        ax.set_xlim(xmin, xmax)
        ax.set_ylim(ymin, ymax)
        ax.set_aspect("equal")
        ax.set_xlabel("x (mm)")
        ax.set_ylabel("y (mm)")
        ax.set_title(f"theta = {frame.theta_deg:.1f} deg   d = {frame.d_mm:.1f} mm")
        ax.grid(True, linewidth=0.3)

    def figure(self, frame: Frame, view) -> Figure:
        fig = Figure(figsize=(FIGURE_INCHES, FIGURE_INCHES), dpi=72)
        ax = fig.add_subplot(1, 1, 1)
        self.draw(ax, frame, view)
        return fig


def render_frames(frames: FrameSeries, out_dir, renderer: FrameRenderer = None) -> list[Path]:
    """Write frame_NNNN.svg for each feasible frame plus index.csv"""
    renderer = renderer or FrameRenderer()
    out_dir = Path(out_dir)
    feasible = frames.feasible_frames()
    if not feasible:
        return []
    view = renderer.view_box(frames)
    written, rows = [], []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with matplotlib.rc_context(SVG_RC):
            for frame in feasible:
                name = f"frame_{frame.index:04d}.svg"
                fig = renderer.figure(frame, view)
                FigureCanvasSVG(fig)
                fig.savefig(out_dir / name, format="svg", metadata={"Date": None})
                written.append(out_dir / name)
                rows.append({"filename": name, "d_mm": frame.d_mm, "theta_deg": frame.theta_deg})
        index = out_dir / "index.csv"
        pd.DataFrame(rows, columns=["filename", "d_mm", "theta_deg"]).to_csv(
            index, index=False, float_format="%.17g"
        )
    except OSError as e:
        raise IoError(f"cannot write frames to {out_dir}: {e}")
    written.append(index)
    return written
