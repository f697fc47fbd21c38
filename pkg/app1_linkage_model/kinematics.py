"""
Linkage Model: Kinematics
Closed-form forward kinematics of the four-bar knee exoskeleton.

Quadrilateral joints (cycle order): J1 -l2- J2 -l3- J3 -l4- J4 -l1- J1.
J3 is the knee pivot, J3-J4 is the shank (ground) link, the thigh runs
J3 -> J2 and continues for l6 past J2. The actuator spans d from J1 to a
mount offset l5 from the thigh line, so J2 sees the triangle (l7, l2, d).
Angles are degrees at every public boundary, radians inside.
"""

import math
from typing import Optional

import numpy as np
import pandas as pd
from scipy import optimize

from shared.config import ACOS_CLAMP_TOL, D_MIN_MM, PARALLEL_TOL_RAD
from shared.errors import GeometryInfeasible, TargetOutOfRange
from shared.models import JointLayout, KneeAngleBreakdown, LinkSet, RomPoint

# samples used to locate the feasible stroke interval before refinement
_INTERVAL_SAMPLES = 4001


def _acos(argument: float, triangle: str) -> tuple[float, bool]:
    """acos with the boundary clamp; returns (angle_rad, at_boundary)"""
    if argument > 1.0 + ACOS_CLAMP_TOL or argument < -1.0 - ACOS_CLAMP_TOL or math.isnan(argument):
        raise GeometryInfeasible(triangle, argument)
    clamped = min(1.0, max(-1.0, argument))
    return math.acos(clamped), abs(abs(argument) - 1.0) <= ACOS_CLAMP_TOL


def _closure(l1, l2, l3, l4, alpha1, alpha2):
    """l8 -> beta1, beta2 once the actuator triangle fixes alpha2"""
    # angle between l2 and l3 at J2 is 180 - alpha1 - alpha2
    l8 = math.sqrt(l2 * l2 + l3 * l3 - 2.0 * l2 * l3 * math.cos(math.pi - alpha1 - alpha2))
    if l8 == 0.0:
        raise GeometryInfeasible("l2, l3, l8", math.inf)

    beta1, edge_b = _acos((l8 * l8 + l3 * l3 - l2 * l2) / (2.0 * l8 * l3), "l2, l3, l8")
    beta2, edge_c = _acos((l8 * l8 + l4 * l4 - l1 * l1) / (2.0 * l8 * l4), "l8, l4, l1")
    return beta1, beta2, l8, edge_b or edge_c


def _chain(l1, l2, l3, l4, l5, l6, d):
    """alpha1 -> alpha2 -> l8 -> beta1, beta2; returns radians plus lengths"""
    l7 = math.hypot(l5, l6)
    alpha1 = math.atan(l5 / l6)
    alpha2, edge_a = _acos((l7 * l7 + l2 * l2 - d * d) / (2.0 * l7 * l2), "l7, l2, d")
    beta1, beta2, l8, edge = _closure(l1, l2, l3, l4, alpha1, alpha2)
    return alpha1, alpha2, beta1, beta2, l7, l8, edge_a or edge


def knee_theta(x, d: float) -> float:
    """theta in degrees for a raw (l1..l6) vector; same path as knee_angle"""
    _, _, beta1, beta2, _, _, _ = _chain(*(float(v) for v in x), d)
    return 180.0 - math.degrees(beta1) - math.degrees(beta2)


def slack_l2(l5: float, l6: float, r: float, d: float) -> float:
    """l2 that leaves singularity slack l2 + d - l7 = r^2"""
    return math.hypot(l5, l6) - d + r * r


def knee_theta_slack(z, d: float) -> float:
    """
    theta in degrees over (l1, l3, l4, l5, l6, r), where l2 = l7 - d + r^2.

    alpha2 comes from the half-angle form sin(alpha2 / 2) = r * sqrt((2d - r^2) / (4 l7 l2)),
    which stays smooth through the collinear pose r = 0 where the acos form
    has unbounded slope. Negative r gives the mirrored alpha2.
    """
    l1, l3, l4, l5, l6, r = (float(v) for v in z)
    l7 = math.hypot(l5, l6)
    l2 = slack_l2(l5, l6, r, d)
    if l2 <= 0.0 or 2.0 * d - r * r <= 0.0:
        raise GeometryInfeasible("l7, l2, d", math.nan)
    half = r * math.sqrt((2.0 * d - r * r) / (4.0 * l7 * l2))
    if abs(half) > 1.0:
        raise GeometryInfeasible("l7, l2, d", half)
    alpha2 = 2.0 * math.asin(half)
    beta1, beta2, _, _ = _closure(l1, l2, l3, l4, math.atan(l5 / l6), alpha2)
    return 180.0 - math.degrees(beta1) - math.degrees(beta2)


def knee_angle(links: LinkSet, d: float) -> KneeAngleBreakdown:
    """Knee joint angle theta = 180 - beta1 - beta2 at actuator length d"""
    if d <= 0:
        raise ValueError(f"Stroke length must be positive, got {d}")
    alpha1, alpha2, beta1, beta2, l7, l8, singular = _chain(*links.as_tuple(), d)

    beta1_deg = math.degrees(beta1)
    beta2_deg = math.degrees(beta2)
    return KneeAngleBreakdown(
        d_mm=d,
        theta_deg=180.0 - beta1_deg - beta2_deg,
        alpha1_deg=math.degrees(alpha1),
        alpha2_deg=math.degrees(alpha2),
        beta1_deg=beta1_deg,
        beta2_deg=beta2_deg,
        l8_mm=l8,
        l7_mm=l7,
        singular=singular,
    )


def grashof_classify(links: LinkSet) -> tuple[str, float]:
    """Return ('crank_rocker_ok' | 'violated', margin_mm)"""
    l1, l2, l3, l4 = links.l1, links.l2, links.l3, links.l4
    margin = (l1 + l2) - (l3 + l4)
    ordering = l3 < l2 and l3 < l1 and l3 < l4 and l2 < l4 and l1 < l4
    return ("crank_rocker_ok" if margin > 0 and ordering else "violated"), margin


def singularity_margin(links: LinkSet, d: float) -> float:
    """s = (l2 + d) - l7; zero when d and l2 are collinear"""
    return (links.l2 + d) - links.l7


def fold_stroke(links: LinkSet) -> float:
    """Stroke at which l2 folds onto l3 (interior angle at J2 reaches zero)"""
    alpha1 = math.atan(links.l5 / links.l6)
    l7, l2 = links.l7, links.l2
    return math.sqrt(l7 * l7 + l2 * l2 + 2.0 * l7 * l2 * math.cos(alpha1))


def _feasible(links: LinkSet, d: float) -> bool:
    try:
        knee_theta(links.as_tuple(), d)
        return True
    except GeometryInfeasible:
        return False


def _refine_edge(links: LinkSet, inside: float, outside: float) -> float:
    """Bisect the feasibility boundary between a feasible and an infeasible stroke"""
    for _ in range(200):
        mid = 0.5 * (inside + outside)
        if mid == inside or mid == outside:
            break
        if _feasible(links, mid):
            inside = mid
        else:
            outside = mid
    return inside


def feasible_stroke_interval(links: LinkSet, anchor: Optional[float] = None) -> tuple[float, float]:
    """
    Contiguous stroke interval on which knee_angle succeeds.

    The (l7, l2, d) triangle bounds d below by |l7 - l2| and the fold of l2
    onto l3 bounds it above; past the fold the closed-form chain describes the
    mirrored linkage. The quadrilateral closure can cut the range further.
    The run containing `anchor` (default d_min, else the longest run) is
    returned with both ends refined by bisection.
    """
    lo, hi = abs(links.l7 - links.l2), fold_stroke(links)
    grid = np.linspace(lo, hi, _INTERVAL_SAMPLES)
    ok = np.array([_feasible(links, float(d)) if d > 0 else False for d in grid])
    if not ok.any():
        raise GeometryInfeasible("l7, l2, d", math.nan)

    # split into runs of consecutive feasible samples
    runs, start = [], None
    for i, flag in enumerate(ok):
        if flag and start is None:
            start = i
        if not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(ok) - 1))

    anchor = D_MIN_MM if anchor is None else anchor
    chosen = max(runs, key=lambda r: r[1] - r[0])
    for run in runs:
        a = grid[run[0] - 1] if run[0] > 0 else grid[run[0]]
        b = grid[run[1] + 1] if run[1] < len(grid) - 1 else grid[run[1]]
        if a <= anchor <= b:
            chosen = run
            break

    i, j = chosen
    d_lo = grid[i] if i == 0 else _refine_edge(links, float(grid[i]), float(grid[i - 1]))
    d_hi = grid[j] if j == len(grid) - 1 else _refine_edge(links, float(grid[j]), float(grid[j + 1]))
    return float(d_lo), float(d_hi)


def stroke_for_angle(links: LinkSet, theta_target: float) -> float:
    """Stroke d with knee_angle(links, d).theta_deg == theta_target (bisection)"""
    d_lo, d_hi = feasible_stroke_interval(links)
    theta_at_lo = knee_angle(links, d_lo).theta_deg
    theta_at_hi = knee_angle(links, d_hi).theta_deg
    top, bottom = max(theta_at_lo, theta_at_hi), min(theta_at_lo, theta_at_hi)
    if not bottom <= theta_target <= top:
        raise TargetOutOfRange(
            f"theta {theta_target:.6g} deg outside achievable ROM [{bottom:.6g}, {top:.6g}] deg"
        )
    if theta_target == theta_at_lo:
        return d_lo
    if theta_target == theta_at_hi:
        return d_hi

    def residual(d):
        return knee_angle(links, d).theta_deg - theta_target

    return float(optimize.bisect(residual, d_lo, d_hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=500))


def _rotate(v: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def _point(v: np.ndarray) -> tuple[float, float]:
    return (float(v[0]), float(v[1]))


def instantaneous_center(j1, j2, j3, j4) -> Optional[tuple[float, float]]:
    """Intersection of the grounded-link lines J3-J2 and J4-J1, None when parallel"""
    p, r = np.asarray(j3, float), np.asarray(j2, float) - np.asarray(j3, float)
    q, u = np.asarray(j4, float), np.asarray(j1, float) - np.asarray(j4, float)
    cross = r[0] * u[1] - r[1] * u[0]
    sin_angle = cross / (np.linalg.norm(r) * np.linalg.norm(u))
    if abs(sin_angle) <= math.sin(PARALLEL_TOL_RAD):
        return None
    qp = q - p
    t = (qp[0] * u[1] - qp[1] * u[0]) / cross
    return _point(p + t * r)


def joint_layout(links: LinkSet, d: float) -> JointLayout:
    """Reconstruct joint coordinates: ankle-side joint J4 at origin, shank along +y"""
    b = knee_angle(links, d)
    beta1, beta2 = math.radians(b.beta1_deg), math.radians(b.beta2_deg)
    alpha1, alpha2 = math.radians(b.alpha1_deg), math.radians(b.alpha2_deg)

    j4 = np.array([0.0, 0.0])
    j3 = np.array([0.0, links.l4])
    down = np.array([0.0, -1.0])
    j1 = j3 + b.l8_mm * _rotate(down, beta2)
    j2 = j3 + links.l3 * _rotate(down, beta1 + beta2)

    # actuator mount: rotate the l2 direction by alpha2 toward the thigh
    # extension, then by alpha1 more to land on the l6 line
    thigh = (j2 - j3) / links.l3
    to_j1 = (j1 - j2) / links.l2
    side = to_j1[0] * thigh[1] - to_j1[1] * thigh[0]
    sign = 1.0 if side >= 0 else -1.0
    l7_dir = _rotate(to_j1, sign * alpha2)
    base = j2 + links.l7 * l7_dir
    thigh_end = j2 + links.l6 * _rotate(l7_dir, sign * alpha1)

    ic = instantaneous_center(j1, j2, j3, j4)
    return JointLayout(
        joint1=_point(j1),
        joint2=_point(j2),
        joint3=_point(j3),
        joint4=_point(j4),
        thigh_end=_point(thigh_end),
        actuator_base=_point(base),
        instantaneous_center=ic,
        ic_at_infinity=ic is None,
    )


def layout_knee_angle(layout: JointLayout) -> float:
    """Knee angle measured from coordinates: 180 - angle(J3->J4, J3->J2)"""
    j3 = np.asarray(layout.joint3)
    u = np.asarray(layout.joint2) - j3
    v = np.asarray(layout.joint4) - j3
    # counterclockwise sweep from the shank to the thigh, in [0, 2pi)
    interior = math.atan2(v[0] * u[1] - v[1] * u[0], float(v @ u)) % (2.0 * math.pi)
    return 180.0 - math.degrees(interior)


def rom_curve(links: LinkSet, d_lo: float, d_hi: float, n: int) -> list[RomPoint]:
    """n evenly spaced knee-angle evaluations; failures kept as infeasible points"""
    if not d_lo < d_hi:
        raise ValueError(f"d_lo ({d_lo}) must be below d_hi ({d_hi})")
    if n < 2:
        raise ValueError("rom_curve needs n >= 2")
    points = []
    for d in np.linspace(d_lo, d_hi, n):
        d = float(d)
        try:
            points.append(RomPoint(d_mm=d, theta_deg=knee_angle(links, d).theta_deg))
        except GeometryInfeasible:
            points.append(RomPoint(d_mm=d, status="infeasible"))
    return points


def write_rom_csv(points: list[RomPoint], path) -> None:
    frame = pd.DataFrame({
        "d_mm": [p.d_mm for p in points],
        "theta_deg": [p.theta_deg for p in points],
        "status": [p.status for p in points],
    })
    frame.to_csv(path, index=False, float_format="%.17g", na_rep="nan")
