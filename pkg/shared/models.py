# Pydantic Models for Data Validation
import math
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, computed_field, field_validator

from .config import (
    D_MIN_MM, DEFAULT_LOWER, DEFAULT_UPPER, GAIT_MEDIAN_THRESHOLD, LINK_NAMES, OUTPUT_DIR,
    RECOGNIZED_KEYS, REFERENCE_START, REFERENCE_OPTIMUM, VALIDATION_STROKE_MM,
)
from .errors import ConfigError, InvalidBounds

Point = tuple[float, float]
Sextuple = tuple[float, float, float, float, float, float]


class LinkSet(BaseModel):
    """Six design lengths of the knee linkage (mm); l7 is always derived"""
    model_config = ConfigDict(frozen=True)

    l1: PositiveFloat
    l2: PositiveFloat
    l3: PositiveFloat
    l4: PositiveFloat
    l5: PositiveFloat
    l6: PositiveFloat

    @computed_field
    @property
    def l7(self) -> float:
        return math.hypot(self.l5, self.l6)

    @classmethod
    def from_sequence(cls, values) -> "LinkSet":
        values = [float(v) for v in values]
        if len(values) != 6:
            raise ValueError(f"Expected 6 link lengths, got {len(values)}")
        return cls(**dict(zip(LINK_NAMES, values)))

    def as_tuple(self) -> Sextuple:
        return (self.l1, self.l2, self.l3, self.l4, self.l5, self.l6)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)


REFERENCE_START_LINKS = LinkSet.from_sequence(REFERENCE_START)
REFERENCE_OPTIMUM_LINKS = LinkSet.from_sequence(REFERENCE_OPTIMUM)


class KneeAngleBreakdown(BaseModel):
    """Knee angle and every intermediate of one (links, stroke) evaluation"""
    model_config = ConfigDict(frozen=True)

    d_mm: float
    theta_deg: float
    alpha1_deg: float
    alpha2_deg: float
    beta1_deg: float
    beta2_deg: float
    l8_mm: float
    l7_mm: float
    singular: bool = False


class JointLayout(BaseModel):
    """Planar joint coordinates (mm) in the ankle frame, shank along +y"""
    model_config = ConfigDict(frozen=True)

    joint1: Point          # coupler end, actuator rod attachment
    joint2: Point          # coupler / thigh-link joint
    joint3: Point          # knee pivot (joint 5)
    joint4: Point          # ankle-side ground joint
    thigh_end: Point       # end of the l6 segment along the thigh line
    actuator_base: Point   # cylinder mount, offset l5 from the thigh line
    instantaneous_center: Optional[Point] = None
    ic_at_infinity: bool = False

    @property
    def knee_pivot(self) -> Point:
        return self.joint3

    @property
    def actuator_tip(self) -> Point:
        return self.joint1


class RomPoint(BaseModel):
    d_mm: float
    theta_deg: float = math.nan
    status: Literal["ok", "infeasible"] = "ok"


class DesignVector(BaseModel):
    """x = (l1, l2, l3, l4, l5, l6) in mm"""
    model_config = ConfigDict(frozen=True)

    values: Sextuple

    @field_validator("values")
    @classmethod
    def _finite(cls, v):
        if not all(math.isfinite(x) for x in v):
            raise ValueError("design vector entries must be finite")
        return v

    @classmethod
    def from_array(cls, x) -> "DesignVector":
        return cls(values=tuple(float(v) for v in x))

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


class BarrierParams(BaseModel):
    """Log-barrier continuation and inner Newton settings"""
    model_config = ConfigDict(frozen=True)

    mu0: float = Field(default=1.0, gt=0)
    mu_shrink: float = Field(default=0.1, gt=0, lt=1)
    mu_min: float = Field(default=1e-8, gt=0)
    inner_tol: float = Field(default=1e-8, gt=0)
    max_inner: int = Field(default=200, gt=0)
    armijo_c: float = Field(default=1e-4, gt=0, lt=0.5)
    backtrack: float = Field(default=0.5, gt=0, lt=1)
    fd_step_rel: float = Field(default=1e-6, gt=0)


class SolveReport(BaseModel):
    x_start: DesignVector
    x_star: DesignVector
    theta_start: float
    theta_star: float
    stage_iterations: list[int]
    mu_trace: list[float]
    stage_theta: list[float]
    stage_kkt: list[float]
    kkt_residual: float
    slacks: dict[str, float]
    active: dict[str, bool]
    status: Literal["converged", "max_iter", "infeasible_start_unrecoverable"]

    @property
    def active_labels(self) -> list[str]:
        return [label for label, flag in self.active.items() if flag]


class SensitivityScan(BaseModel):
    axis: int
    direction: tuple[float, ...]
    offsets: list[float]
    values: list[float]        # -theta, nan where infeasible
    feasible: list[bool]


class Frame(BaseModel):
    index: int
    d_mm: float
    theta_deg: float = math.nan
    layout: Optional[JointLayout] = None
    status: Literal["ok", "infeasible"] = "ok"


class FrameSeries(BaseModel):
    links: LinkSet
    d_lo: float
    d_hi: float
    frames: list[Frame]

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    def feasible_frames(self) -> list[Frame]:
        return [f for f in self.frames if f.status == "ok"]


class MarkerSeries(BaseModel):
    """Timestamped planar ankle/knee/hip/waist positions"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    t: np.ndarray
    ankle: np.ndarray    # (n, 2)
    knee: np.ndarray
    hip: np.ndarray
    waist: np.ndarray
    source: Literal["human", "exoskeleton", "synthetic"] = "human"
    dropped: int = 0

    def __len__(self) -> int:
        return len(self.t)


class AngleSeries(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    t: np.ndarray
    theta_deg: np.ndarray       # nan at degenerate samples
    degenerate: np.ndarray      # bool mask
    source: str = "human"


class PairedSeries(BaseModel):
    """Two signals on a shared normalized progress grid s in [0, 1]"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    s: np.ndarray
    human: np.ndarray     # (n,) angles or (n, 2) trajectory
    exo: np.ndarray


class ErrorSeries(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    s: np.ndarray
    relative_error: np.ndarray
    max: float
    mean: float
    median: float
    fraction_zero: float


class AngleConvention(BaseModel):
    """Affine map from the marker-based knee angle to the mechanism angle"""
    model_config = ConfigDict(frozen=True)

    scale: float = 1.0
    offset_deg: float = 0.0

    def to_mechanism(self, gait_deg):
        return self.scale * np.asarray(gait_deg, dtype=float) + self.offset_deg


class ProblemConfig(BaseModel):
    d_min_mm: float = D_MIN_MM
    lower: Sextuple = DEFAULT_LOWER
    upper: Sextuple = DEFAULT_UPPER


def _float(raw: dict[str, str], key: str, default: float) -> float:
    if key not in raw:
        return default
    try:
        value = float(raw[key])
    except ValueError:
        raise ConfigError(f"Config key '{key}' is not a number: {raw[key]!r}")
    if not math.isfinite(value):
        raise ConfigError(f"Config key '{key}' must be finite, got {raw[key]!r}")
    return value


# RunConfig field -> config key, for error messages
_FIELD_KEYS = {
    "sweep_d_lo": "sweep.d_lo",
    "sweep_d_hi": "sweep.d_hi",
    "sweep_n": "sweep.n",
    "simulate_n_frames": "simulate.n_frames",
    "gait_n": "gait.n",
    "gait_threshold": "gait.threshold",
    "validate_d_mm": "validate.d_mm",
}


def _int(raw: dict[str, str], key: str, default: int) -> int:
    value = _float(raw, key, default)
    if value != int(value):
        raise ConfigError(f"Config key '{key}' must be a whole number, got {raw[key]!r}")
    return int(value)


class RunConfig(BaseModel):
    """Fully parsed run configuration (config file + --set overrides)"""

    problem: ProblemConfig = ProblemConfig()
    solver: BarrierParams = BarrierParams()
    start: LinkSet = REFERENCE_START_LINKS
    links: LinkSet = REFERENCE_OPTIMUM_LINKS
    output_dir: Path = OUTPUT_DIR
    sweep_d_lo: Optional[PositiveFloat] = None
    sweep_d_hi: Optional[PositiveFloat] = None
    sweep_n: int = Field(default=500, ge=2)
    simulate_n_frames: int = Field(default=500, ge=2)
    gait_human: Optional[Path] = None
    gait_exo: Optional[Path] = None
    gait_n: int = Field(default=200, ge=2)
    gait_threshold: PositiveFloat = GAIT_MEDIAN_THRESHOLD
    validate_d_mm: PositiveFloat = VALIDATION_STROKE_MM

    @classmethod
    def from_mapping(cls, raw: dict[str, str]) -> "RunConfig":
        unknown = sorted(set(raw) - RECOGNIZED_KEYS)
        if unknown:
            raise ConfigError(f"Unknown config key '{unknown[0]}'")

        d_min = _float(raw, "d_min_mm", D_MIN_MM)
        if d_min <= 0:
            raise InvalidBounds("Config key 'd_min_mm' must be positive")
        lower = tuple(_float(raw, f"lb.{n}", lo) for n, lo in zip(LINK_NAMES, DEFAULT_LOWER))
        upper = tuple(_float(raw, f"ub.{n}", hi) for n, hi in zip(LINK_NAMES, DEFAULT_UPPER))
        for name, lo, hi in zip(LINK_NAMES, lower, upper):
            if lo <= 0:
                raise InvalidBounds(f"Config key 'lb.{name}' must be positive (got {lo})")
            if lo >= hi:
                raise InvalidBounds(f"Config key 'lb.{name}' = {lo} is not below 'ub.{name}' = {hi}")

        solver_fields = {}
        for key in BarrierParams.model_fields:
            full = f"solver.{key}"
            if full in raw:
                value = _float(raw, full, 0.0)
                solver_fields[key] = _int(raw, full, 0) if key == "max_inner" else value

        def links_from(prefix: str, default: tuple) -> LinkSet:
            values = [_float(raw, f"{prefix}.{n}", v) for n, v in zip(LINK_NAMES, default)]
            for n, v in zip(LINK_NAMES, values):
                if v <= 0:
                    raise ConfigError(f"Config key '{prefix}.{n}' must be positive")
            return LinkSet.from_sequence(values)

        def optional_float(key):
            return _float(raw, key, 0.0) if key in raw else None

        d_lo, d_hi = optional_float("sweep.d_lo"), optional_float("sweep.d_hi")
        if d_lo is not None and d_hi is not None and d_lo >= d_hi:
            raise ConfigError(f"Config key 'sweep.d_lo' = {d_lo} is not below 'sweep.d_hi' = {d_hi}")

        try:
            return cls(
                problem=ProblemConfig(d_min_mm=d_min, lower=lower, upper=upper),
                solver=BarrierParams(**solver_fields),
                start=links_from("start", REFERENCE_START),
                links=links_from("links", REFERENCE_OPTIMUM),
                output_dir=Path(raw.get("output_dir", str(OUTPUT_DIR))),
                sweep_d_lo=d_lo,
                sweep_d_hi=d_hi,
                sweep_n=_int(raw, "sweep.n", 500),
                simulate_n_frames=_int(raw, "simulate.n_frames", 500),
                gait_human=Path(raw["gait.human"]) if "gait.human" in raw else None,
                gait_exo=Path(raw["gait.exo"]) if "gait.exo" in raw else None,
                gait_n=_int(raw, "gait.n", 200),
                gait_threshold=_float(raw, "gait.threshold", GAIT_MEDIAN_THRESHOLD),
                validate_d_mm=_float(raw, "validate.d_mm", VALIDATION_STROKE_MM),
            )
        except ValidationError as e:
            error = e.errors()[0]
            name = str(error["loc"][0]) if error["loc"] else ""
            key = f"solver.{name}" if name in BarrierParams.model_fields else _FIELD_KEYS.get(name, name)
            raise ConfigError(f"Config key '{key}' is invalid: {error['msg']}")
