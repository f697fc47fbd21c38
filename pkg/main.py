#!/usr/bin/env python3
"""
ExoKnee - Main Orchestrator
Linkage synthesis workflows for the four-bar knee exoskeleton:
optimize -> angle / sweep -> simulate -> gait -> validate
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from pydantic import ValidationError

from shared.config import ANIMATION_FPS, parse_overrides, read_config_file
from shared.console import log, out
from shared.errors import ConfigError, ExoKneeError, GeometryInfeasible, MaxIterations
from shared.models import LinkSet, RunConfig
from app1_linkage_model.kinematics import (
    feasible_stroke_interval, grashof_classify, knee_angle, rom_curve, singularity_margin, write_rom_csv,
)
from app1_linkage_model.problem import build_problem
from app2_design_optimizer.design_optimizer import DesignOptimizer, link_table
from app2_design_optimizer.services.grid_service import grid_search
from app2_design_optimizer.services.report_service import (
    render_text_report, write_constraint_csv, write_text_report, write_trace_csv,
)
from app3_motion_simulator.motion_simulator import (
    frame_at_stroke, knee_trajectory, simulate_sts, sts_stroke_range, write_trajectory_csv,
)
from app3_motion_simulator.services.animation_service import render_animation
from app3_motion_simulator.services.figure_service import (
    plot_gait_comparison, plot_rom_curve, plot_sensitivity_scans,
)
from app3_motion_simulator.services.svg_render_service import render_frames
from app4_gait_analyzer.gait_analyzer import (
    align_and_resample, calibrate_convention, knee_angle_series, load_markers, relative_error,
    summary_lines, write_error_csv, write_summary, write_synthetic_sts,
)

GRID_TOLERANCE_DEG = 0.5
SCAN_SPAN_MM = 5.0
SCAN_POINTS = 41


def load_run_config(args) -> RunConfig:
    raw = read_config_file(Path(args.config) if args.config else None)
    raw.update(parse_overrides(args.set))
    return RunConfig.from_mapping(raw)


def _check_stroke_range(d_lo: float, d_hi: float) -> None:
    if not d_lo < d_hi:
        raise ConfigError(f"Stroke range is empty: sweep.d_lo = {d_lo:g} is not below sweep.d_hi = {d_hi:g}")


def _theta_or_none(links: LinkSet, d: float):
    try:
        return knee_angle(links, d).theta_deg
    except GeometryInfeasible:
        return None


# =========================================
# optimize
# =========================================

def cmd_optimize(cfg: RunConfig, args) -> int:
    out_dir = cfg.output_dir / "optimize"
    d_min = cfg.problem.d_min_mm
    problem = build_problem(cfg.problem)
    optimizer = DesignOptimizer(problem, cfg.solver, verbose=args.verbose)

    log(f"🔧 Optimizing knee angle at d_min = {d_min:g} mm ({len(problem.constraints)} constraints)")
    report = optimizer.solve(cfg.start.as_array())
    theta_initial = _theta_or_none(cfg.start, d_min)

    write_text_report(report, out_dir / "report.txt", theta_initial)
    write_constraint_csv(report, out_dir / "constraints.csv")
    write_trace_csv(report, out_dir / "trace.csv")
    (out_dir / "report.json").write_text(report.model_dump_json(indent=2))
    log(f"💾 Reports saved to: {out_dir}")

    out(render_text_report(report, theta_initial).rstrip())

    if args.grid_check:
        log(f"🔧 Grid oracle at resolution {args.grid_check}")
        x_grid, theta_grid = grid_search(problem, args.grid_check)
        out(f"theta_solver={report.theta_star:.6f}")
        out(f"theta_grid={theta_grid:.6f}")
        out(link_table(x_grid))
        if report.theta_star < theta_grid - GRID_TOLERANCE_DEG:
            log(f"❌ Solver ({report.theta_star:.4f} deg) is below the grid optimum ({theta_grid:.4f} deg)")
            return 2

    if report.status != "converged":
        raise MaxIterations(
            f"barrier solve stopped with status {report.status} (KKT residual {report.kkt_residual:.3e})"
        )
    log("✅ Optimization converged")
    return 0


# =========================================
# angle
# =========================================

def cmd_angle(cfg: RunConfig, args) -> int:
    links = LinkSet.from_sequence(args.links) if args.links else cfg.links
    d = args.d if args.d is not None else cfg.problem.d_min_mm
    if not d > 0:
        raise ConfigError(f"--d must be a positive stroke length, got {d:g}")
    breakdown = knee_angle(links, d)

    if args.json:
        out(breakdown.model_dump_json(indent=2))
        return 0

    label, margin = grashof_classify(links)
    for key, value in breakdown.model_dump().items():
        out(f"{key}={value}")
    out(f"grashof={label}")
    out(f"grashof_margin_mm={margin}")
    out(f"singularity_margin_mm={singularity_margin(links, d)}")
    return 0


# =========================================
# sweep
# =========================================

def cmd_sweep(cfg: RunConfig, args) -> int:
    links = cfg.links
    d_lo, d_hi = cfg.sweep_d_lo, cfg.sweep_d_hi
    if d_lo is None or d_hi is None:
        lo, hi = feasible_stroke_interval(links, anchor=cfg.problem.d_min_mm)
        d_lo = lo if d_lo is None else d_lo
        d_hi = hi if d_hi is None else d_hi
    _check_stroke_range(d_lo, d_hi)

    points = rom_curve(links, d_lo, d_hi, cfg.sweep_n)
    path = cfg.output_dir / "sweep" / "rom.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    write_rom_csv(points, path)

    feasible = [p for p in points if p.status == "ok"]
    log(f"💾 ROM curve saved to: {path}")
    out(f"rows={len(points)}")
    out(f"feasible={len(feasible)}")
    out(f"d_lo_mm={d_lo}")
    out(f"d_hi_mm={d_hi}")
    if feasible:
        out(f"theta_max_deg={max(p.theta_deg for p in feasible)}")
        out(f"theta_min_deg={min(p.theta_deg for p in feasible)}")
    return 0


# =========================================
# simulate
# =========================================

def cmd_simulate(cfg: RunConfig, args) -> int:
    out_dir = cfg.output_dir / "simulate"
    d_lo, d_hi = sts_stroke_range(cfg.links, cfg.problem.d_min_mm)
    if cfg.sweep_d_lo is not None:
        d_lo = cfg.sweep_d_lo
    if cfg.sweep_d_hi is not None:
        d_hi = cfg.sweep_d_hi
    _check_stroke_range(d_lo, d_hi)

    log(f"🔧 Simulating {cfg.simulate_n_frames} frames over d = [{d_lo:.3f}, {d_hi:.3f}] mm")
    frames = simulate_sts(cfg.links, d_lo, d_hi, cfg.simulate_n_frames)
    written = render_frames(frames, out_dir / "frames")
    trajectory = knee_trajectory(frames)
    write_trajectory_csv(trajectory, out_dir / "trajectory.csv")
    if args.gif:
        render_animation(frames, out_dir / "sts.gif", fps=ANIMATION_FPS)
    log(f"💾 {len(written) - 1 if written else 0} frames saved to: {out_dir / 'frames'}")

    feasible = frames.feasible_frames()
    out(f"frames={frames.frame_count}")
    out(f"feasible_frames={len(feasible)}")
    if feasible:
        out(f"theta_start_deg={feasible[0].theta_deg}")
        out(f"theta_end_deg={feasible[-1].theta_deg}")
    return 0


# =========================================
# gait
# =========================================

def cmd_gait(cfg: RunConfig, args) -> int:
    out_dir = cfg.output_dir / "gait"
    human_path = Path(args.human) if args.human else cfg.gait_human
    exo_path = Path(args.exo) if args.exo else cfg.gait_exo
    d_lo, d_hi = sts_stroke_range(cfg.links, cfg.problem.d_min_mm)
    if exo_path is None:
        exo_path = write_synthetic_sts(cfg.links, d_lo, d_hi, cfg.gait_n, out_dir / "synthetic_exo.csv")
        log(f"💾 Synthetic exoskeleton recording: {exo_path}")
    if human_path is None:
        human_path = exo_path
        log("⚠️ No human recording configured, comparing the exoskeleton recording with itself")

    human = load_markers(human_path, source="human")
    exo = load_markers(exo_path, source="exoskeleton")
    for series in (human, exo):
        if series.dropped:
            log(f"⚠️ {series.source}: dropped {series.dropped} unparseable rows")

    human_angles, exo_angles = knee_angle_series(human), knee_angle_series(exo)
    for series in (human_angles, exo_angles):
        if series.degenerate.any():
            log(f"⚠️ {series.source}: {int(series.degenerate.sum())} samples with degenerate marker vectors")

    angle_pairs = align_and_resample(human_angles, exo_angles, cfg.gait_n)
    angle_errors = relative_error(angle_pairs)
    path_pairs = align_and_resample(human, exo, cfg.gait_n)
    path_errors = relative_error(path_pairs)
    convention = calibrate_convention(cfg.links, d_hi)

    write_error_csv(angle_pairs, angle_errors, out_dir / "angle_error.csv")
    write_error_csv(path_pairs, path_errors, out_dir / "trajectory_error.csv")
    lines = [
        f"human={human_path}",
        f"exo={exo_path}",
        f"human_dropped={human.dropped}",
        f"exo_dropped={exo.dropped}",
        f"convention_scale={convention.scale}",
        f"convention_offset_deg={convention.offset_deg}",
    ]
    lines += summary_lines(angle_errors, cfg.gait_threshold, prefix="angle.")
    lines += summary_lines(path_errors, cfg.gait_threshold, prefix="trajectory.")
    write_summary(lines, out_dir / "summary.txt")
    log(f"💾 Gait reports saved to: {out_dir}")

    for line in lines:
        out(line)
    return 0


# =========================================
# validate
# =========================================

def cmd_validate(cfg: RunConfig, args) -> int:
    d_check = cfg.validate_d_mm
    theta_direct = knee_angle(cfg.links, d_check).theta_deg

    # the sweep ends exactly on the check stroke
    d_lo, _ = sts_stroke_range(cfg.links, cfg.problem.d_min_mm)
    frames = simulate_sts(cfg.links, min(d_lo, d_check), d_check, cfg.simulate_n_frames)
    frame = frame_at_stroke(frames, d_check)
    if frame.status != "ok":
        raise GeometryInfeasible("validation frame", float("nan"))

    out(f"d_mm={d_check}")
    out(f"theta_direct_deg={theta_direct}")
    out(f"frame_d_mm={frame.d_mm}")
    out(f"theta_frame_deg={frame.theta_deg}")
    out(f"difference_deg={abs(theta_direct - frame.theta_deg)}")
    log("✅ Validation complete")
    return 0


# =========================================
# plot
# =========================================

def cmd_plot(cfg: RunConfig, args) -> int:
    out_dir = cfg.output_dir / "plots"
    links = cfg.links
    d_min = cfg.problem.d_min_mm

    lo, hi = feasible_stroke_interval(links, anchor=d_min)
    plot_rom_curve(rom_curve(links, lo, hi, cfg.sweep_n), out_dir / "rom_curve.svg", d_min=d_min)

    optimizer = DesignOptimizer(build_problem(cfg.problem), cfg.solver)
    x_star = links.as_array()
    scans = [optimizer.sensitivity_scan(x_star, axis, SCAN_SPAN_MM, SCAN_POINTS) for axis in range(6)]
    plot_sensitivity_scans(scans, out_dir / "local_minima.svg")

    if cfg.gait_human is not None and cfg.gait_exo is not None:
        human = load_markers(cfg.gait_human, source="human")
        exo = load_markers(cfg.gait_exo, source="exoskeleton")
        pairs = align_and_resample(knee_angle_series(human), knee_angle_series(exo), cfg.gait_n)
        plot_gait_comparison(pairs, relative_error(pairs), out_dir / "gait_angle.svg")
        paths = align_and_resample(human, exo, cfg.gait_n)
        plot_gait_comparison(paths, relative_error(paths), out_dir / "gait_trajectory.svg")

    log(f"💾 Figures saved to: {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Four-bar knee exoskeleton linkage synthesis",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py optimize                          # reference start, d_min = 242 mm
  python main.py optimize --grid-check 5           # plus the brute-force oracle
  python main.py angle --d 242                     # breakdown for the configured links
  python main.py --set sweep.n=200 sweep           # ROM curve CSV
  python main.py simulate --gif                    # SVG frames + animation
  python main.py gait --human human.csv            # compare against the synthetic exoskeleton
        """
    )
    parser.add_argument("--config", type=str, help="key=value run configuration file")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE", help="Override a config key (repeatable)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Per-stage solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="Maximize the knee angle at d_min")
    p.add_argument("--grid-check", type=int, metavar="N", help="Also run the grid oracle at N points per axis")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("angle", help="Knee angle breakdown for one stroke")
    p.add_argument("--links", type=float, nargs=6, metavar=("L1", "L2", "L3", "L4", "L5", "L6"))
    p.add_argument("--d", type=float, help="Stroke length in mm (default d_min)")
    p.add_argument("--json", action="store_true", help="Emit the breakdown as JSON")
    p.set_defaults(func=cmd_angle)

    p = sub.add_parser("sweep", help="Knee angle over a stroke range")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Sit-to-stand frames and knee trajectories")
    p.add_argument("--gif", action="store_true", help="Also write an animated GIF")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gait", help="Compare human and exoskeleton marker recordings")
    p.add_argument("--human", type=str, help="Human marker CSV")
    p.add_argument("--exo", type=str, help="Exoskeleton marker CSV (default: synthetic from the configured links)")
    p.set_defaults(func=cmd_gait)

    p = sub.add_parser("validate", help="Knee angle at the prototype check stroke vs the simulation")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("plot", help="ROM curve, local scans and gait figures")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_run_config(args)
        return args.func(cfg, args)
    except ExoKneeError as e:
        log(f"❌ {e}")
        return e.exit_code
    except ValidationError as e:
        log(f"❌ Invalid configuration: {e}")
        return 1
    except OSError as e:
        log(f"❌ I/O failure: {e}")
        return 3
    except KeyboardInterrupt:
        log("⚠️ Interrupted by user")
        return 1


if __name__ == "__main__":
    sys.exit(main())
