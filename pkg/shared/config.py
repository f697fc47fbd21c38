# Shared Configuration - ExoKnee linkage synthesis
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv, dotenv_values

from .errors import ConfigError

load_dotenv()

# Paths
PROJECT_ROOT = Path(__file__).parent.parent
OUTPUT_DIR = Path(os.getenv("EXOKNEE_OUTPUT_DIR", str(PROJECT_ROOT / "output")))

# ===========================================
# Actuator (linear DC motor, cylinder + piston)
# ===========================================
D_MIN_MM = float(os.getenv("EXOKNEE_D_MIN_MM", "242.0"))
VALIDATION_STROKE_MM = 252.0  # prototype check point
ACTUATOR_CYLINDER_MM = float(os.getenv("EXOKNEE_ACTUATOR_CYLINDER_MM", "150.0"))

# ===========================================
# Reference designs (mm): l1..l6
# ===========================================
REFERENCE_START = (85.0, 85.0, 85.0, 80.0, 80.0, 235.0)
REFERENCE_OPTIMUM = (59.081, 68.84, 55.964, 71.849, 118.63, 287.31)

# Anthropometric bounds, average 80 kg / 180 cm subject
DEFAULT_LOWER = (50.0, 50.0, 50.0, 50.0, 50.0, 200.0)
DEFAULT_UPPER = (100.0, 100.0, 100.0, 100.0, 120.0, 300.0)

# ===========================================
# Numerical tolerances
# ===========================================
ACOS_CLAMP_TOL = 1e-12
PARALLEL_TOL_RAD = 1e-9
FEASIBILITY_EPS = 1e-9
PHASE_ONE_MARGIN = 1e-6

# ===========================================
# Simulation / rendering
# ===========================================
CANVAS_UNITS = 800          # SVG canvas is 800x800 units
STANDING_ANGLE_DEG = 2.0    # standing pose
SITTING_ANGLE_DEG = 148.0   # deepest reported pose
WAIST_OFFSET_MM = float(os.getenv("EXOKNEE_WAIST_OFFSET_MM", "150.0"))
SAMPLE_RATE_HZ = float(os.getenv("EXOKNEE_SAMPLE_RATE_HZ", "30.0"))
ANIMATION_FPS = 12

# ===========================================
# Gait comparison
# ===========================================
RELATIVE_ERROR_EPS = 1e-9
ZERO_ERROR_TOL = 1e-9
GAIT_MEDIAN_THRESHOLD = 0.05

LINK_NAMES = ("l1", "l2", "l3", "l4", "l5", "l6")

# Every key a run config file may carry
RECOGNIZED_KEYS = frozenset(
    ["d_min_mm", "output_dir", "validate.d_mm"]
    + [f"lb.{n}" for n in LINK_NAMES]
    + [f"ub.{n}" for n in LINK_NAMES]
    + [f"start.{n}" for n in LINK_NAMES]
    + [f"links.{n}" for n in LINK_NAMES]
    + [f"solver.{k}" for k in (
        "mu0", "mu_shrink", "mu_min", "inner_tol", "max_inner",
        "armijo_c", "backtrack", "fd_step_rel",
    )]
    + ["sweep.d_lo", "sweep.d_hi", "sweep.n", "simulate.n_frames"]
    + ["gait.human", "gait.exo", "gait.n", "gait.threshold"]
)


def read_config_file(path: Optional[Path]) -> dict[str, str]:
    """Read a flat key=value run configuration file (dotenv syntax)."""
    if path is None:
        return {}
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    values = dotenv_values(path)
    bare = sorted(k for k, v in values.items() if v is None)
    if bare:
        raise ConfigError(f"Config key '{bare[0]}' in {path} has no value (expected key=value)")
    return dict(values)


def parse_overrides(pairs: Optional[list[str]]) -> dict[str, str]:
    """Turn repeated --set key=value arguments into a dict."""
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"Override '{pair}' is not of the form key=value")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides
