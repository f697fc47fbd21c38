import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app1_linkage_model.problem import build_problem, objective_value, safe_objective
from shared.config import DEFAULT_LOWER, DEFAULT_UPPER, REFERENCE_START, REFERENCE_OPTIMUM
from shared.errors import GeometryInfeasible, InvalidBounds
from shared.models import ProblemConfig

FUNCTIONAL_LABELS = [
    "grashof",
    "ordering.l3_lt_l2",
    "ordering.l3_lt_l1",
    "ordering.l3_lt_l4",
    "ordering.l2_lt_l4",
    "ordering.l1_lt_l4",
    "proportion.l5_lt_l6",
    "proportion.l4_lt_l6",
    "singularity",
]


def test_default_constraint_set(problem):
    assert len(problem.constraints) == 21
    assert len(problem.functional()) == 9
    assert problem.labels[:9] == FUNCTIONAL_LABELS
    assert len(set(problem.labels)) == 21
    assert sum(c.category == "bound" for c in problem.constraints) == 12


def test_labels_are_stable(problem):
    assert build_problem().labels == problem.labels
    assert problem.labels[9:11] == ["bound.lb.l1", "bound.ub.l1"]
    assert problem.labels[-1] == "bound.ub.l6"


def test_optimum_values(problem):
    values = problem.evaluate(REFERENCE_OPTIMUM)
    assert all(v <= 1e-6 for v in values.values())
    assert_allclose(values["grashof"], -0.108, atol=1e-9)
    assert abs(values["singularity"]) < 0.01
    assert values["singularity"] < 0


def test_initial_is_on_boundary(problem):
    values = problem.evaluate(REFERENCE_START)
    assert values["ordering.l3_lt_l2"] == 0.0
    assert not problem.strictly_feasible(REFERENCE_START)
    assert not problem.is_feasible(REFERENCE_START)


def test_bound_values(problem):
    values = problem.evaluate(REFERENCE_OPTIMUM)
    assert_allclose(values["bound.lb.l6"], 200.0 - 287.31, atol=1e-12)
    assert_allclose(values["bound.ub.l5"], 118.63 - 120.0, atol=1e-12)


def test_objective_values(problem):
    assert abs(objective_value(problem, REFERENCE_OPTIMUM) - 148.0) <= 2.0
    assert abs(objective_value(problem, REFERENCE_START) - 85.1) <= 0.5


def test_objective_propagates_geometry_errors(problem):
    x = np.array(REFERENCE_OPTIMUM)
    x[5] += 10.0
    with pytest.raises(GeometryInfeasible):
        objective_value(problem, x)
    assert math.isnan(safe_objective(problem, x))


def test_scaling_constraints_keeps_objective_and_feasible_set(problem):
    scaled = problem.with_scaled_constraints(10.0)
    rng = np.random.default_rng(3)
    for _ in range(200):
        x = rng.uniform(DEFAULT_LOWER, DEFAULT_UPPER)
        assert scaled.strictly_feasible(x) == problem.strictly_feasible(x)
        assert_allclose(scaled.values(x), 10.0 * problem.values(x), rtol=1e-12, atol=1e-12)
    theta = objective_value(problem, REFERENCE_OPTIMUM)
    assert objective_value(scaled, REFERENCE_OPTIMUM) == theta


def test_strict_interior_has_finite_objective(problem):
    rng = np.random.default_rng(11)
    found = 0
    for _ in range(50000):
        x = rng.uniform(DEFAULT_LOWER, DEFAULT_UPPER)
        if problem.strictly_feasible(x):
            assert math.isfinite(safe_objective(problem, x))
            found += 1
    assert found > 0


def test_singularity_matches_acos_domain(problem):
    singularity = problem.constraints[problem.labels.index("singularity")]
    rng = np.random.default_rng(5)
    for _ in range(2000):
        x = rng.uniform(DEFAULT_LOWER, DEFAULT_UPPER)
        l2, l7, d = x[1], math.hypot(x[4], x[5]), problem.d_min
        if singularity(x) < 0 and l7 > abs(l2 - d):
            argument = (l7 ** 2 + l2 ** 2 - d ** 2) / (2 * l7 * l2)
            assert -1.0 < argument < 1.0


def test_analytic_singularity_derivatives(problem):
    singularity = problem.constraints[problem.labels.index("singularity")]
    x = np.array(REFERENCE_OPTIMUM)
    h = 1e-6
    numeric = np.array([
        (singularity(x + h * e) - singularity(x - h * e)) / (2 * h) for e in np.eye(6)
    ])
    assert_allclose(singularity.grad(x), numeric, atol=1e-8)
    hess = singularity.hess(x)
    assert_allclose(hess, hess.T)


@pytest.mark.parametrize("lower, upper", [
    ((50, 50, 50, 50, 50, 200), (40, 100, 100, 100, 120, 300)),
    ((50, 50, 50, 50, 130, 200), (100, 100, 100, 100, 120, 300)),
    ((0, 50, 50, 50, 50, 200), (100, 100, 100, 100, 120, 300)),
])
def test_invalid_bounds(lower, upper):
    with pytest.raises(InvalidBounds):
        build_problem(ProblemConfig(lower=lower, upper=upper))


def test_invalid_bounds_message_names_key():
    with pytest.raises(InvalidBounds, match="lb.l5"):
        build_problem(ProblemConfig(lower=(50, 50, 50, 50, 130, 200)))
