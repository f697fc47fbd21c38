#!/usr/bin/env python3
"""
App 3: Motion Simulator
Stroke-driven frames of the knee exoskeleton through sit-to-stand, with
knee-pivot and instantaneous-center trajectories.
"""

import argparse
import math
import sys
from pathlib import Path

# Add parent to path for shared imports
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pandas as pd

from app1_linkage_model.kinematics import (
    feasible_stroke_interval, joint_layout, knee_angle, stroke_for_angle,
)
from shared.config import ANIMATION_FPS, D_MIN_MM, OUTPUT_DIR, STANDING_ANGLE_DEG
from shared.console import log, out
from shared.errors import ExoKneeError, GeometryInfeasible, IoError
from shared.models import REFERENCE_OPTIMUM_LINKS, Frame, FrameSeries, JointLayout, LinkSet
from app3_motion_simulator.services import render_animation, render_frames

TRAJECTORY_COLUMNS = [
    "d_mm", "theta_deg", "knee_x_mm", "knee_y_mm", "ic_x_mm", "ic_y_mm", "ic_at_infinity",
]


def _frame(index: int, links: LinkSet, d: float) -> Frame:
    try:
        theta = knee_angle(links, d).theta_deg
        return Frame(index=index, d_mm=d, theta_deg=theta, layout=joint_layout(links, d))
    except GeometryInfeasible:
        return Frame(index=index, d_mm=d, status="infeasible")


def simulate_sts(links: LinkSet, d_lo: float, d_hi: float, n_frames: int) -> FrameSeries:
    """Frames at n_frames evenly spaced strokes, ascending d"""
    if n_frames < 2:
        raise ValueError("simulate_sts needs n_frames >= 2")
    if d_lo > d_hi:
        d_lo, d_hi = d_hi, d_lo
    strokes = np.linspace(d_lo, d_hi, n_frames)
    frames = [_frame(i, links, float(d)) for i, d in enumerate(strokes)]
    return FrameSeries(links=links, d_lo=d_lo, d_hi=d_hi, frames=frames)


def sts_stroke_range(links: LinkSet, d_min: float = D_MIN_MM, standing_deg: float = STANDING_ANGLE_DEG):
    """From the minimum stroke (deepest sitting) to the standing pose stroke"""
    interval_lo, _ = feasible_stroke_interval(links)
    return max(d_min, interval_lo), stroke_for_angle(links, standing_deg)


def frame_at_stroke(frames: FrameSeries, d: float) -> Frame:
    """Nearest frame by stroke"""
    return min(frames.frames, key=lambda f: abs(f.d_mm - d))


def knee_trajectory(frames: FrameSeries) -> pd.DataFrame:
    """Knee pivot and instantaneous-center paths over the feasible frames"""
    if not frames.frames:
        raise ValueError("knee_trajectory needs at least one frame")
    rows = []
    for frame in frames.feasible_frames():
        layout = frame.layout
        ic = layout.instantaneous_center
        rows.append({
            "d_mm": frame.d_mm,
            "theta_deg": frame.theta_deg,
            "knee_x_mm": layout.knee_pivot[0],
            "knee_y_mm": layout.knee_pivot[1],
            "ic_x_mm": ic[0] if ic is not None else math.nan,
            "ic_y_mm": ic[1] if ic is not None else math.nan,
            "ic_at_infinity": int(layout.ic_at_infinity),
        })
    return pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS)


def write_trajectory_csv(trajectory: pd.DataFrame, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        trajectory.to_csv(path, index=False, float_format="%.17g", na_rep="nan")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}")
    return path


def read_trajectory_csv(path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            path, float_precision="round_trip", dtype={c: float for c in TRAJECTORY_COLUMNS[:-1]},
        )
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}")
    frame["ic_at_infinity"] = frame["ic_at_infinity"].astype(int)
    return frame[TRAJECTORY_COLUMNS]


def actuator_misalignment_deg(layout: JointLayout) -> float:
    """Angle between the actuator axis and link l2; zero at the singular pose"""
    j1, j2 = np.asarray(layout.joint1), np.asarray(layout.joint2)
    axis = j1 - np.asarray(layout.actuator_base)
    link = j2 - j1
    cos = float(axis @ link) / (np.linalg.norm(axis) * np.linalg.norm(link))
    return math.degrees(math.acos(min(1.0, max(-1.0, cos))))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Render sit-to-stand frames for a link set")
    parser.add_argument("--links", type=float, nargs=6, metavar="L", help="Lengths l1..l6 (default: reference optimum)")
    parser.add_argument("--frames", "-n", type=int, default=500, help="Frame count (default: 500)")
    parser.add_argument("--output", "-o", type=str, help="Output directory")
    parser.add_argument("--gif", action="store_true", help="Also write an animated GIF")
    args = parser.parse_args(argv)

    links = LinkSet.from_sequence(args.links) if args.links else REFERENCE_OPTIMUM_LINKS
    out_dir = Path(args.output) if args.output else OUTPUT_DIR / "simulate"
    try:
        d_lo, d_hi = sts_stroke_range(links)
        frames = simulate_sts(links, d_lo, d_hi, args.frames)
        render_frames(frames, out_dir / "frames")
        write_trajectory_csv(knee_trajectory(frames), out_dir / "trajectory.csv")
        if args.gif:
            render_animation(frames, out_dir / "sts.gif", fps=ANIMATION_FPS)
    except (ExoKneeError, ValueError) as e:
        log(f"❌ Error: {e}")
        return getattr(e, "exit_code", 1)

    feasible = frames.feasible_frames()
    out(f"frames={frames.frame_count}")
    out(f"feasible_frames={len(feasible)}")
    log(f"💾 Saved to: {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
