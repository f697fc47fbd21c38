"""
End-to-end CLI tests through main(); every run writes under tmp_path.
"""

import json

import numpy as np
import pandas as pd
import pytest

from app2_design_optimizer.design_optimizer import main as optimizer_main
from app3_motion_simulator.motion_simulator import main as simulator_main, sts_stroke_range
from app4_gait_analyzer.gait_analyzer import main as gait_main, write_synthetic_sts
from main import main
from shared.config import REFERENCE_OPTIMUM
from shared.models import REFERENCE_OPTIMUM_LINKS


def _run(capsys, out_dir, *argv):
    code = main(["--set", f"output_dir={out_dir}", *argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _values(stdout: str) -> dict[str, str]:
    return dict(line.split("=", 1) for line in stdout.splitlines() if "=" in line)


class TestAngle:

    def test_optimum(self, capsys, out_dir):
        code, stdout, _ = _run(capsys, out_dir, "angle")
        assert code == 0
        values = _values(stdout)
        assert abs(float(values["theta_deg"]) - 148.0) <= 2.0
        assert values["grashof"] == "crank_rocker_ok"
        assert float(values["singularity_margin_mm"]) < 0.2

    def test_explicit_links_as_json(self, capsys, out_dir):
        code, stdout, _ = _run(
            capsys, out_dir, "angle", "--links", "85", "85", "85", "80", "80", "235", "--d", "242", "--json",
        )
        assert code == 0
        assert abs(json.loads(stdout)["theta_deg"] - 85.1) <= 0.5

    @pytest.mark.parametrize("d", ["-5", "0", "nan"])
    def test_non_positive_stroke(self, capsys, out_dir, d):
        code, _, stderr = _run(capsys, out_dir, "angle", "--d", d)
        assert code == 1
        assert "--d" in stderr

    def test_infeasible_stroke(self, capsys, out_dir):
        code, _, stderr = _run(capsys, out_dir, "angle", "--d", "200")
        assert code == 2
        assert "l7, l2, d" in stderr

    def test_invalid_bounds(self, capsys, out_dir):
        code, _, stderr = _run(capsys, out_dir, "--set", "lb.l1=120", "--set", "ub.l1=100", "angle")
        assert code == 1
        assert "lb.l1" in stderr

    def test_missing_config(self, capsys, out_dir, tmp_path):
        code, _, _ = _run(capsys, out_dir, "--config", str(tmp_path / "absent.env"), "angle")
        assert code == 1


class TestSweep:

    def test_rows_and_monotonicity(self, capsys, out_dir):
        code, stdout, _ = _run(capsys, out_dir, "sweep")
        assert code == 0
        assert _values(stdout)["rows"] == "500"
        table = pd.read_csv(out_dir / "sweep" / "rom.csv", float_precision="round_trip")
        assert len(table) == 500
        theta = table.loc[table["status"] == "ok", "theta_deg"].to_numpy()
        assert np.all(np.diff(theta) < 0)

    def test_explicit_range(self, capsys, out_dir):
        code, stdout, _ = _run(capsys, out_dir, "--set", "sweep.d_lo=200", "--set", "sweep.d_hi=300",
                               "--set", "sweep.n=11", "sweep")
        assert code == 0
        values = _values(stdout)
        assert values["rows"] == "11"
        assert int(values["feasible"]) < 11


def test_validate(capsys, out_dir):
    code, stdout, _ = _run(capsys, out_dir, "--set", "simulate.n_frames=50", "validate")
    assert code == 0
    values = _values(stdout)
    assert float(values["frame_d_mm"]) == 252.0
    assert float(values["difference_deg"]) == 0.0


def test_simulate(capsys, out_dir):
    code, stdout, _ = _run(capsys, out_dir, "--set", "simulate.n_frames=5", "simulate")
    assert code == 0
    assert _values(stdout)["feasible_frames"] == "5"
    assert len(list((out_dir / "simulate" / "frames").glob("frame_*.svg"))) == 5
    assert (out_dir / "simulate" / "trajectory.csv").exists()


def test_gait_against_itself(capsys, out_dir):
    code, stdout, _ = _run(capsys, out_dir, "--set", "gait.n=50", "gait")
    assert code == 0
    values = _values(stdout)
    assert values["angle.fraction_zero"] == "1.0"
    assert values["trajectory.fraction_zero"] == "1.0"
    assert values["angle.median_below_threshold"] == "true"
    summary = (out_dir / "gait" / "summary.txt").read_text().splitlines()
    assert summary == stdout.splitlines()


def test_gait_missing_file(capsys, out_dir, tmp_path):
    code, _, _ = _run(capsys, out_dir, "gait", "--human", str(tmp_path / "absent.csv"))
    assert code == 3


@pytest.mark.slow
def test_optimize(capsys, out_dir):
    code, stdout, _ = _run(capsys, out_dir, "optimize")
    assert code == 0
    report = json.loads((out_dir / "optimize" / "report.json").read_text())
    assert report["theta_star"] >= 147.5
    assert (out_dir / "optimize" / "constraints.csv").exists()
    assert stdout.strip()


def test_plot(capsys, out_dir):
    code, _, _ = _run(capsys, out_dir, "--set", "sweep.n=50", "plot")
    assert code == 0
    assert (out_dir / "plots" / "rom_curve.svg").exists()
    assert (out_dir / "plots" / "local_minima.svg").exists()
    assert not (out_dir / "plots" / "gait_angle.svg").exists()


@pytest.mark.parametrize("overrides, key", [
    (["sweep.n=1"], "sweep.n"),
    (["sweep.n=nan"], "sweep.n"),
    (["sweep.n=inf"], "sweep.n"),
    (["sweep.d_lo=300", "sweep.d_hi=250"], "sweep.d_lo"),
    (["simulate.n_frames=1"], "simulate.n_frames"),
])
def test_bad_run_settings_exit_cleanly(capsys, out_dir, overrides, key):
    argv = [arg for pair in overrides for arg in ("--set", pair)]
    code, stdout, stderr = _run(capsys, out_dir, *argv, "sweep")
    assert code == 1
    assert key in stderr
    assert stdout == ""


def test_sweep_range_with_defaulted_end(capsys, out_dir):
    code, _, stderr = _run(capsys, out_dir, "--set", "sweep.d_lo=400", "sweep")
    assert code == 1
    assert "sweep.d_lo" in stderr


def test_unwritable_output_dir(capsys, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    code, _, _ = _run(capsys, blocker, "sweep")
    assert code == 3


def test_solver_stop_exits_with_domain_code(capsys, out_dir):
    start = [f"start.l{i}={v}" for i, v in enumerate(REFERENCE_OPTIMUM, start=1)]
    argv = [arg for pair in start + ["solver.max_inner=1", "solver.mu_min=0.1"] for arg in ("--set", pair)]
    code, _, stderr = _run(capsys, out_dir, *argv, "optimize")
    assert code == 2
    assert "max_iter" in stderr
    assert (out_dir / "optimize" / "report.txt").exists()


@pytest.mark.slow
def test_optimize_grid_check(capsys, out_dir):
    code, stdout, _ = _run(capsys, out_dir, "optimize", "--grid-check", "4")
    assert code == 0
    values = _values(stdout)
    assert float(values["theta_grid"]) <= float(values["theta_solver"]) + 0.5
    assert float(values["theta_solver"]) >= 147.5


# =========================================
# Stage entry points
# =========================================

def test_simulator_stage_main(capsys, out_dir):
    assert simulator_main(["--frames", "3", "--output", str(out_dir)]) == 0
    assert _values(capsys.readouterr().out)["feasible_frames"] == "3"
    assert (out_dir / "trajectory.csv").exists()
    assert len(list((out_dir / "frames").glob("frame_*.svg"))) == 3


def test_gait_stage_main(capsys, out_dir):
    d_lo, d_hi = sts_stroke_range(REFERENCE_OPTIMUM_LINKS)
    recording = write_synthetic_sts(REFERENCE_OPTIMUM_LINKS, d_lo, d_hi, 40, out_dir / "exo.csv")
    code = gait_main(["--human", str(recording), "--exo", str(recording), "-n", "30", "--output", str(out_dir)])
    assert code == 0
    assert _values(capsys.readouterr().out)["angle.fraction_zero"] == "1.0"
    assert (out_dir / "summary.txt").exists()


def test_gait_stage_main_missing_file(capsys, out_dir, tmp_path):
    absent = str(tmp_path / "absent.csv")
    assert gait_main(["--human", absent, "--exo", absent, "--output", str(out_dir)]) == 3


@pytest.mark.slow
def test_optimizer_stage_main(capsys, out_dir):
    assert optimizer_main(["--output", str(out_dir)]) == 0
    assert "status            : converged" in capsys.readouterr().out
    assert (out_dir / "constraints.csv").exists()
