# App 1 package: linkage kinematics and the design problem
from .kinematics import (
    knee_angle, knee_theta, grashof_classify, singularity_margin, stroke_for_angle, joint_layout,
    rom_curve, write_rom_csv, feasible_stroke_interval, fold_stroke, layout_knee_angle, instantaneous_center,
)
from .problem import (
    DesignProblem, InequalityConstraint, build_problem, default_problem, objective_value, safe_objective,
)
