import math

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from app1_linkage_model.kinematics import knee_angle, rom_curve, stroke_for_angle
from app3_motion_simulator.motion_simulator import (
    TRAJECTORY_COLUMNS, actuator_misalignment_deg, frame_at_stroke, knee_trajectory,
    read_trajectory_csv, simulate_sts, sts_stroke_range, write_trajectory_csv,
)
from app3_motion_simulator.services.animation_service import render_animation
from app3_motion_simulator.services.figure_service import (
    plot_gait_comparison, plot_rom_curve, plot_sensitivity_scans,
)
from app3_motion_simulator.services.svg_render_service import render_frames
from shared.errors import IoError
from shared.models import REFERENCE_OPTIMUM_LINKS, ErrorSeries, PairedSeries, SensitivityScan


@pytest.fixture(scope="module")
def sts_frames():
    d_lo, d_hi = sts_stroke_range(REFERENCE_OPTIMUM_LINKS)
    return simulate_sts(REFERENCE_OPTIMUM_LINKS, d_lo, d_hi, 500)


# =========================================
# Frames
# =========================================

def test_endpoint_poses(sts_frames):
    first, last = sts_frames.frames[0], sts_frames.frames[-1]
    assert first.d_mm == 242.0
    assert abs(first.theta_deg - 148.0) <= 2.0
    assert_allclose(last.theta_deg, 2.0, atol=1e-9)


def test_frames_match_kinematics(sts_frames, optimum_links):
    strokes = [f.d_mm for f in sts_frames.frames]
    assert strokes == sorted(strokes)
    for frame in sts_frames.frames[::25]:
        assert frame.status == "ok"
        assert frame.theta_deg == knee_angle(optimum_links, frame.d_mm).theta_deg


@pytest.mark.parametrize("target", [70.0, 110.0])
def test_intermediate_poses(sts_frames, target):
    nearest = min(sts_frames.feasible_frames(), key=lambda f: abs(f.theta_deg - target))
    assert abs(nearest.theta_deg - target) < 0.5


def test_two_frames(optimum_links):
    frames = simulate_sts(optimum_links, 242.0, 300.0, 2)
    assert [f.d_mm for f in frames.frames] == [242.0, 300.0]


def test_infeasible_frames_flagged(optimum_links):
    frames = simulate_sts(optimum_links, 200.0, 260.0, 7)
    assert frames.frames[0].status == "infeasible"
    assert frames.frames[0].layout is None
    assert frames.frames[-1].status == "ok"


def test_too_few_frames(optimum_links):
    with pytest.raises(ValueError):
        simulate_sts(optimum_links, 242.0, 300.0, 1)


def test_validation_stroke_bit_for_bit(optimum_links):
    frames = simulate_sts(optimum_links, 242.0, 252.0, 101)
    frame = frame_at_stroke(frames, 252.0)
    assert frame.d_mm == 252.0
    assert frame.theta_deg == knee_angle(optimum_links, 252.0).theta_deg


def test_singular_pose_collinearity(sts_frames):
    # the actuator line meets l2 at about half a degree at d_min
    assert actuator_misalignment_deg(sts_frames.frames[0].layout) < 0.6


def test_exact_singularity_is_collinear(optimum_links):
    frames = simulate_sts(optimum_links, optimum_links.l7 - optimum_links.l2, 260.0, 3)
    assert actuator_misalignment_deg(frames.frames[0].layout) < 0.01


# =========================================
# Trajectories
# =========================================

def test_single_frame_trajectory(optimum_links):
    frames = simulate_sts(optimum_links, 250.0, 251.0, 2)
    frames.frames.pop()
    trajectory = knee_trajectory(frames)
    assert len(trajectory) == 1
    assert list(trajectory.columns) == TRAJECTORY_COLUMNS


def test_knee_pivot_is_fixed(sts_frames, optimum_links):
    trajectory = knee_trajectory(sts_frames)
    assert len(trajectory) == len(sts_frames.feasible_frames())
    assert np.all(trajectory["knee_x_mm"] == 0.0)
    assert np.all(trajectory["knee_y_mm"] == optimum_links.l4)


def test_ic_is_continuous_away_from_parallel(optimum_links):
    d_lo, d_hi = sts_stroke_range(optimum_links)
    trajectory = knee_trajectory(simulate_sts(optimum_links, d_lo + 1.0, d_hi, 500))
    ic = trajectory[["ic_x_mm", "ic_y_mm"]].to_numpy()
    # near-parallel grounded links push the center far out; only pairs close to the knee count
    reach = np.hypot(ic[:, 0], ic[:, 1] - optimum_links.l4)
    near = np.isfinite(reach) & (reach < 200.0)
    both = near[1:] & near[:-1]
    steps = np.hypot(*np.diff(ic, axis=0).T)
    assert np.all(steps[both] < 5.0)


def test_trajectory_csv_round_trip(sts_frames, out_dir):
    trajectory = knee_trajectory(sts_frames)
    path = write_trajectory_csv(trajectory, out_dir / "trajectory.csv")
    assert path.read_text().splitlines()[0] == ",".join(TRAJECTORY_COLUMNS)
    pd.testing.assert_frame_equal(read_trajectory_csv(path), trajectory)


# =========================================
# Rendering
# =========================================

def test_render_counts(optimum_links, out_dir):
    frames = simulate_sts(optimum_links, 242.0, 300.0, 4)
    written = render_frames(frames, out_dir / "frames")
    svgs = sorted((out_dir / "frames").glob("*.svg"))
    assert len(svgs) == 4
    assert len(written) == 5
    index = pd.read_csv(out_dir / "frames" / "index.csv", float_precision="round_trip")
    assert list(index.columns) == ["filename", "d_mm", "theta_deg"]
    assert list(index["filename"]) == [p.name for p in svgs]
    assert list(index["d_mm"]) == [f.d_mm for f in frames.frames]


def test_render_is_deterministic(optimum_links, tmp_path):
    frames = simulate_sts(optimum_links, 242.0, 300.0, 3)
    render_frames(frames, tmp_path / "a")
    render_frames(frames, tmp_path / "b")
    for path in sorted((tmp_path / "a").iterdir()):
        assert path.read_bytes() == (tmp_path / "b" / path.name).read_bytes()


def test_render_canvas(optimum_links, out_dir):
    frames = simulate_sts(optimum_links, 242.0, 300.0, 2)
    render_frames(frames, out_dir)
    text = (out_dir / "frame_0000.svg").read_text()
    assert 'width="800pt"' in text and 'height="800pt"' in text


def test_render_io_error(optimum_links, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    with pytest.raises(IoError):
        render_frames(simulate_sts(optimum_links, 242.0, 300.0, 2), blocker / "frames")


def test_animation(optimum_links, out_dir):
    frames = simulate_sts(optimum_links, 242.0, 300.0, 6)
    path = render_animation(frames, out_dir / "sts.gif", max_frames=4)
    assert path.read_bytes()[:6] in (b"GIF87a", b"GIF89a")


# =========================================
# Figures
# =========================================

def test_figures(optimum_links, out_dir):
    rom = plot_rom_curve(rom_curve(optimum_links, 240.0, 300.0, 50), out_dir / "rom.svg", d_min=242.0)
    scans = [
        SensitivityScan(axis=i, direction=tuple(float(i == k) for k in range(6)),
                        offsets=[-1.0, 0.0, 1.0], values=[-147.0, -148.0, math.nan], feasible=[True, True, False])
        for i in range(6)
    ]
    minima = plot_sensitivity_scans(scans, out_dir / "scans.svg")
    s = np.linspace(0, 1, 5)
    pairs = PairedSeries(s=s, human=s * 100, exo=s * 100 + 1)
    errors = ErrorSeries(s=s, relative_error=np.abs(1 / np.maximum(s * 100, 1e-9)), max=1.0, mean=0.1, median=0.02,
                         fraction_zero=0.0)
    gait = plot_gait_comparison(pairs, errors, out_dir / "gait.svg")
    for path in (rom, minima, gait):
        assert path.stat().st_size > 0


def test_standing_stroke_is_range_end(optimum_links):
    _, d_hi = sts_stroke_range(optimum_links)
    assert d_hi == stroke_for_angle(optimum_links, 2.0)
