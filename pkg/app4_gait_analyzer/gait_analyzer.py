#!/usr/bin/env python3
"""
App 4: Gait Analyzer
Compares human and exoskeleton sit-to-stand recordings exported as marker
tables: knee angles from the ankle-knee-hip vectors, progress-normalized
alignment, and pointwise relative error.
"""

import argparse
import math
import sys
from pathlib import Path
from typing import Union

# Add parent to path for shared imports
sys.path.insert(0, str(Path(__file__).parent.parent))

import numpy as np
import pandas as pd

from app1_linkage_model.kinematics import joint_layout
from shared.config import (
    ACOS_CLAMP_TOL, GAIT_MEDIAN_THRESHOLD, OUTPUT_DIR, RELATIVE_ERROR_EPS, SAMPLE_RATE_HZ,
    STANDING_ANGLE_DEG, WAIST_OFFSET_MM, ZERO_ERROR_TOL,
)
from shared.console import log, out
from shared.errors import (
    DegenerateVectors, ExoKneeError, IoError, MalformedHeader, NonMonotonicTime, NoOverlap, TooFewSamples,
)
from shared.models import (
    AngleConvention, AngleSeries, ErrorSeries, JointLayout, LinkSet, MarkerSeries, PairedSeries,
)

MARKER_COLUMNS = ["t", "ax", "ay", "kx", "ky", "hx", "hy", "wx", "wy"]

Signal = Union[AngleSeries, MarkerSeries, PairedSeries]


# ----------------------------------------------------------------------
# Ingest
# ----------------------------------------------------------------------

def _parse_float(text) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        return math.nan


def load_markers(path, source: str = "human") -> MarkerSeries:
    """
    Read a marker table with header t,ax,ay,kx,ky,hx,hy,wx,wy.

    Rows with any field that does not parse as a finite number are dropped
    and counted on the returned series.
    """
    path = Path(path)
    bad_lines = []
    try:
        raw = pd.read_csv(
            path, dtype=str, skipinitialspace=True, keep_default_na=False,
            engine="python", on_bad_lines=lambda fields: bad_lines.append(fields),
        )
    except pd.errors.EmptyDataError:
        raise MalformedHeader(f"{path}: empty file, expected header {','.join(MARKER_COLUMNS)}")
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}")

    header = [c.strip() for c in raw.columns]
    if header != MARKER_COLUMNS:
        raise MalformedHeader(f"{path}: header {','.join(header)} != {','.join(MARKER_COLUMNS)}")
    raw.columns = header

    values = raw.apply(lambda column: column.map(_parse_float))
    good = np.isfinite(values.to_numpy(dtype=float)).all(axis=1)
    dropped = int((~good).sum()) + len(bad_lines)
    table = values[good].to_numpy(dtype=float)

    if len(table) < 2:
        raise TooFewSamples(f"{path}: {len(table)} usable samples, need at least 2")
    t = table[:, 0]
    steps = np.diff(t)
    if np.any(steps <= 0):
        row = int(np.argmax(steps <= 0)) + 1
        raise NonMonotonicTime(f"{path}: time not strictly increasing at sample {row} (t={t[row]!r})")

    return MarkerSeries(
        t=t,
        ankle=table[:, 1:3],
        knee=table[:, 3:5],
        hip=table[:, 5:7],
        waist=table[:, 7:9],
        source=source,
        dropped=dropped,
    )


# ----------------------------------------------------------------------
# Knee angle from markers
# ----------------------------------------------------------------------

def vector_angle_deg(ankle, knee, hip) -> float:
    """Angle between AK = K - A and KH = H - K; 0 for a straight leg"""
    ak = np.asarray(knee, dtype=float) - np.asarray(ankle, dtype=float)
    kh = np.asarray(hip, dtype=float) - np.asarray(knee, dtype=float)
    n_ak, n_kh = np.linalg.norm(ak), np.linalg.norm(kh)
    if n_ak == 0.0 or n_kh == 0.0:
        raise DegenerateVectors(f"zero-length {'AK' if n_ak == 0.0 else 'KH'}")
    cos = float(ak @ kh) / (n_ak * n_kh)
    if abs(cos) > 1.0 + ACOS_CLAMP_TOL:
        raise DegenerateVectors(f"cosine {cos!r} outside [-1, 1]")
    return math.degrees(math.acos(min(1.0, max(-1.0, cos))))


def knee_angle_series(series: MarkerSeries) -> AngleSeries:
    """Per-sample knee angle; degenerate samples are flagged and carry nan"""
    theta = np.full(len(series), np.nan)
    degenerate = np.zeros(len(series), dtype=bool)
    for i in range(len(series)):
        try:
            theta[i] = vector_angle_deg(series.ankle[i], series.knee[i], series.hip[i])
        except DegenerateVectors:
            degenerate[i] = True
    return AngleSeries(t=series.t.copy(), theta_deg=theta, degenerate=degenerate, source=series.source)


# ----------------------------------------------------------------------
# Alignment
# ----------------------------------------------------------------------

def _signal(series: Signal, column: str = "human") -> tuple[np.ndarray, np.ndarray]:
    if isinstance(series, AngleSeries):
        return series.t, series.theta_deg
    if isinstance(series, MarkerSeries):
        return series.t, series.knee
    return series.s, getattr(series, column)


def _progress_grid(t: np.ndarray, values: np.ndarray, n: int, label: str) -> np.ndarray:
    keep = np.isfinite(values).all(axis=1) if values.ndim == 2 else np.isfinite(values)
    t, values = t[keep], values[keep]
    if len(t) < 2 or t[-1] <= t[0]:
        raise NoOverlap(f"{label} series has no usable time span")
    progress = (t - t[0]) / (t[-1] - t[0])
    grid = np.linspace(0.0, 1.0, n)
    if values.ndim == 1:
        return np.interp(grid, progress, values)
    return np.column_stack([np.interp(grid, progress, values[:, k]) for k in range(values.shape[1])])


def align_and_resample(a: Signal, b: Signal, n: int) -> PairedSeries:
    """
    Map both series to progress s in [0, 1] by their own time span and
    interpolate linearly at n evenly spaced s values.

    Angle series pair angles, marker series pair knee positions; a
    PairedSeries passed as a or b contributes its human or exo column.
    """
    if n < 2:
        raise ValueError("align_and_resample needs n >= 2")
    t_a, v_a = _signal(a, "human")
    t_b, v_b = _signal(b, "exo")
    if v_a.ndim != v_b.ndim:
        raise NoOverlap("cannot pair an angle series with a trajectory")
    return PairedSeries(
        s=np.linspace(0.0, 1.0, n),
        human=_progress_grid(np.asarray(t_a, dtype=float), np.asarray(v_a, dtype=float), n, "first"),
        exo=_progress_grid(np.asarray(t_b, dtype=float), np.asarray(v_b, dtype=float), n, "second"),
    )


# ----------------------------------------------------------------------
# Error
# ----------------------------------------------------------------------

def relative_error(pairs: PairedSeries, eps: float = RELATIVE_ERROR_EPS) -> ErrorSeries:
    """|human - exo| / max(|human|, eps); Euclidean norms for trajectories"""
    diff = pairs.human - pairs.exo
    if diff.ndim == 2:
        num = np.linalg.norm(diff, axis=1)
        den = np.linalg.norm(pairs.human, axis=1)
    else:
        num, den = np.abs(diff), np.abs(pairs.human)
    err = num / np.maximum(den, eps)
    return ErrorSeries(
        s=pairs.s,
        relative_error=err,
        max=float(np.max(err)),
        mean=float(np.mean(err)),
        median=float(np.median(err)),
        fraction_zero=float(np.mean(err <= ZERO_ERROR_TOL)),
    )


# ----------------------------------------------------------------------
# Synthetic recordings and convention mapping
# ----------------------------------------------------------------------

def markers_from_layout(layout: JointLayout, waist_offset: float = WAIST_OFFSET_MM) -> list[float]:
    """Ankle at joint 4, knee at the knee pivot, hip at the thigh end, waist above the hip"""
    hip = layout.thigh_end
    return [
        *layout.joint4,
        *layout.knee_pivot,
        *hip,
        hip[0], hip[1] + waist_offset,
    ]


def write_synthetic_sts(
    links: LinkSet, d_lo: float, d_hi: float, n: int, path, rate_hz: float = SAMPLE_RATE_HZ,
) -> Path:
    """Export mechanism poses over an evenly spaced stroke sweep as a marker table"""
    if n < 2:
        raise ValueError("write_synthetic_sts needs n >= 2")
    rows = []
    for i, d in enumerate(np.linspace(d_lo, d_hi, n)):
        rows.append([i / rate_hz, *markers_from_layout(joint_layout(links, float(d)))])
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        pd.DataFrame(rows, columns=MARKER_COLUMNS).to_csv(path, index=False, float_format="%.17g")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}")
    return path


def calibrate_convention(links: LinkSet, standing_d: float, standing_deg: float = STANDING_ANGLE_DEG) -> AngleConvention:
    """Fix the offset so the marker angle of the standing pose maps onto the mechanism angle"""
    ankle, knee, hip = np.reshape(markers_from_layout(joint_layout(links, standing_d))[:6], (3, 2))
    return AngleConvention(scale=1.0, offset_deg=standing_deg - vector_angle_deg(ankle, knee, hip))


# ----------------------------------------------------------------------
# Reports
# ----------------------------------------------------------------------

def error_table(pairs: PairedSeries, errors: ErrorSeries) -> pd.DataFrame:
    if pairs.human.ndim == 2:
        return pd.DataFrame({
            "s": pairs.s,
            "human_x": pairs.human[:, 0], "human_y": pairs.human[:, 1],
            "exo_x": pairs.exo[:, 0], "exo_y": pairs.exo[:, 1],
            "rel_err": errors.relative_error,
        })
    return pd.DataFrame({"s": pairs.s, "human": pairs.human, "exo": pairs.exo, "rel_err": errors.relative_error})


def write_error_csv(pairs: PairedSeries, errors: ErrorSeries, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        error_table(pairs, errors).to_csv(path, index=False, float_format="%.17g")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}")
    return path


def summary_lines(errors: ErrorSeries, threshold: float, prefix: str = "", **extra) -> list[str]:
    values = {
        "max": errors.max,
        "mean": errors.mean,
        "median": errors.median,
        "fraction_zero": errors.fraction_zero,
        "threshold": threshold,
        "median_below_threshold": str(errors.median < threshold).lower(),
    }
    values.update(extra)
    return [f"{prefix}{key}={value}" for key, value in values.items()]


def write_summary(lines: list[str], path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}")
    return path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Relative error between two sit-to-stand marker recordings")
    parser.add_argument("--human", required=True, type=str, help="Human marker CSV")
    parser.add_argument("--exo", required=True, type=str, help="Exoskeleton marker CSV")
    parser.add_argument("--samples", "-n", type=int, default=200, help="Progress samples (default: 200)")
    parser.add_argument("--threshold", type=float, default=GAIT_MEDIAN_THRESHOLD, help="Median error threshold")
    parser.add_argument("--output", "-o", type=str, help="Output directory")
    args = parser.parse_args(argv)

    out_dir = Path(args.output) if args.output else OUTPUT_DIR / "gait"
    try:
        human = load_markers(args.human, source="human")
        exo = load_markers(args.exo, source="exoskeleton")
        pairs = align_and_resample(knee_angle_series(human), knee_angle_series(exo), args.samples)
        errors = relative_error(pairs)
        write_error_csv(pairs, errors, out_dir / "angle_error.csv")
        lines = summary_lines(errors, args.threshold, prefix="angle.")
        write_summary(lines, out_dir / "summary.txt")
    except ExoKneeError as e:
        log(f"❌ Error: {e}")
        return e.exit_code

    for line in lines:
        out(line)
    log(f"💾 Saved to: {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
