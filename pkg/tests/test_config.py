from pathlib import Path

import pytest

from shared.config import DEFAULT_LOWER, REFERENCE_OPTIMUM, parse_overrides, read_config_file
from shared.errors import ConfigError, InvalidBounds
from shared.models import RunConfig


def test_defaults():
    cfg = RunConfig.from_mapping({})
    assert cfg.problem.d_min_mm == 242.0
    assert cfg.problem.lower == DEFAULT_LOWER
    assert cfg.links.as_tuple() == REFERENCE_OPTIMUM
    assert cfg.sweep_d_lo is None
    assert cfg.validate_d_mm == 252.0


def test_unknown_key_is_named():
    with pytest.raises(ConfigError, match="lb.l7"):
        RunConfig.from_mapping({"lb.l7": "10"})


def test_lower_above_upper_is_named():
    with pytest.raises(InvalidBounds, match="lb.l1"):
        RunConfig.from_mapping({"lb.l1": "120", "ub.l1": "100"})


def test_non_positive_lower_bound():
    with pytest.raises(InvalidBounds):
        RunConfig.from_mapping({"lb.l3": "0"})


def test_not_a_number():
    with pytest.raises(ConfigError, match="sweep.n"):
        RunConfig.from_mapping({"sweep.n": "many"})


def test_solver_keys():
    cfg = RunConfig.from_mapping({"solver.mu_shrink": "0.2", "solver.max_inner": "50"})
    assert cfg.solver.mu_shrink == 0.2
    assert cfg.solver.max_inner == 50
    assert isinstance(cfg.solver.max_inner, int)


def test_invalid_solver_value():
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"solver.mu_shrink": "1.5"})


def test_links_and_paths():
    cfg = RunConfig.from_mapping({
        "links.l1": "60", "output_dir": "/tmp/exo", "gait.human": "human.csv", "sweep.d_lo": "240",
    })
    assert cfg.links.l1 == 60.0
    assert cfg.output_dir == Path("/tmp/exo")
    assert cfg.gait_human == Path("human.csv")
    assert cfg.gait_exo is None
    assert cfg.sweep_d_lo == 240.0


def test_overrides():
    assert parse_overrides(["a=1", " b = x=y "]) == {"a": "1", "b": "x=y"}
    assert parse_overrides(None) == {}
    with pytest.raises(ConfigError):
        parse_overrides(["missing-equals"])


def test_config_file(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("# optimizer bounds\nlb.l6=210\nub.l6=290\nsweep.n=100\n")
    raw = read_config_file(path)
    assert raw == {"lb.l6": "210", "ub.l6": "290", "sweep.n": "100"}
    cfg = RunConfig.from_mapping({**raw, **parse_overrides(["sweep.n=50"])})
    assert cfg.problem.lower[5] == 210.0
    assert cfg.sweep_n == 50


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "absent.env")
    assert read_config_file(None) == {}


def test_bare_key_in_config_file(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("lb.l9\nsweep.n=100\n")
    with pytest.raises(ConfigError, match="lb.l9"):
        read_config_file(path)


@pytest.mark.parametrize("key, value", [
    ("sweep.n", "1"),
    ("sweep.n", "nan"),
    ("sweep.n", "2.5"),
    ("simulate.n_frames", "1"),
    ("gait.n", "-3"),
    ("validate.d_mm", "0"),
    ("solver.max_inner", "inf"),
    ("sweep.d_lo", "-10"),
])
def test_out_of_range_value_is_named(key, value):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        RunConfig.from_mapping({key: value})


def test_sweep_range_must_be_ordered():
    with pytest.raises(ConfigError, match="sweep.d_lo"):
        RunConfig.from_mapping({"sweep.d_lo": "300", "sweep.d_hi": "250"})
