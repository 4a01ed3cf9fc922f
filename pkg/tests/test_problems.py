"""Problem container tests: hand-evaluated values, gradients, eigenvalues."""

import numpy as np
import pytest

from apadmm import (
    CallableCost,
    ConcaveQuadratic,
    ConsensusProblem,
    IterationTrace,
    augmented_lagrangian,
    ball_diameter,
    check_gradients,
    check_lipschitz,
    feasibility_gap,
    initial_state,
    leading_eigenvalue,
    objective,
    smooth_gradient,
    smooth_value,
)
from apadmm.benchmark import SparsePcaSpec, generate
from apadmm.problems import finite_difference_gradient


def scalar_problem(l1_weight=0.0, radius=10.0):
    """K=1 instance with g(x) = -x^2/2 (concave quadratic from B = [[1]])."""
    return ConsensusProblem([ConcaveQuadratic(np.array([[1.0]]))],
                            l1_weight=l1_weight, radius=radius)


def make_state(problem, x, x_local, y, stale=None, iteration=1):
    state = initial_state(problem)
    state.x = np.asarray(x, dtype=float)
    state.x_local = np.asarray(x_local, dtype=float)
    state.y = np.asarray(y, dtype=float)
    if stale is not None:
        state.stale_index = np.asarray(stale, dtype=int)
    state.iteration = iteration
    return state


# -- objective ---------------------------------------------------------------

def test_objective_zero_data_is_zero():
    spec = SparsePcaSpec(dim=8, num_components=3, nonzero_prob=0.0, seed=0)
    problem = generate(spec)
    rng = np.random.default_rng(1)
    for _ in range(5):
        x = rng.standard_normal(8)
        assert objective(problem, x) == 0.0


def test_objective_scalar_hand_value():
    # g(x) = -x^2/2, lambda = 1: at x = 2 the terms cancel, -2 + 2 = 0
    problem = scalar_problem(l1_weight=1.0)
    assert objective(problem, np.array([2.0])) == pytest.approx(0.0, abs=1e-15)


def test_objective_matches_dense_cross_check():
    spec = SparsePcaSpec(dim=12, num_components=4, rows=6, seed=7)
    problem = generate(spec)
    rng = np.random.default_rng(2)
    for _ in range(5):
        x = rng.standard_normal(12)
        ref = sum(-0.5 * float(np.linalg.norm(c.B @ x) ** 2)
                  for c in problem.components)
        assert objective(problem, x) == pytest.approx(ref, rel=1e-12)
        np.testing.assert_allclose(
            smooth_gradient(problem, x),
            sum(-(c.B.T @ (c.B @ x)) for c in problem.components), rtol=1e-12)


def test_objective_dimension_mismatch():
    problem = scalar_problem()
    with pytest.raises(ValueError):
        objective(problem, np.zeros(3))


# -- augmented Lagrangian ----------------------------------------------------

def test_augmented_lagrangian_consensus_equals_objective():
    spec = SparsePcaSpec(dim=6, num_components=2, rows=4, l1_weight=0.3, seed=3)
    problem = generate(spec)
    rng = np.random.default_rng(4)
    x = rng.standard_normal(6) * 0.3
    state = make_state(problem, x, np.tile(x, (2, 1)), np.zeros((2, 6)))
    assert augmented_lagrangian(problem, state, [2.0, 3.0]) == pytest.approx(
        objective(problem, x), rel=1e-12)


def test_augmented_lagrangian_scalar_hand_value():
    # g(z) = -z^2/2, x = 0, x_1 = 1, y_1 = 2, rho = 4: -0.5 + 2 + 2 = 3.5
    problem = scalar_problem()
    state = make_state(problem, [0.0], [[1.0]], [[2.0]])
    assert augmented_lagrangian(problem, state, [4.0]) == pytest.approx(3.5, abs=1e-15)


# -- feasibility gap ---------------------------------------------------------

def test_feasibility_gap_consensus_is_zero():
    problem = scalar_problem()
    state = make_state(problem, [0.7], [[0.7]], [[0.0]])
    assert feasibility_gap(state) == (0.0, 0.0)


def test_feasibility_gap_hand_value():
    spec = SparsePcaSpec(dim=2, num_components=2, rows=2, seed=0)
    problem = generate(spec)
    state = make_state(problem, [1.0, 0.0],
                       [[1.0, 0.0], [0.0, 0.0]], np.zeros((2, 2)))
    absolute, relative = feasibility_gap(state)
    assert absolute == 1.0
    assert relative == 1.0


def test_feasibility_gap_zero_master_fallback():
    # relative gap is defined as the absolute one when ||x|| = 0
    spec = SparsePcaSpec(dim=2, num_components=1, rows=2, seed=0)
    problem = generate(spec)
    state = make_state(problem, [0.0, 0.0], [[0.6, 0.8]], np.zeros((1, 2)))
    absolute, relative = feasibility_gap(state)
    assert absolute == pytest.approx(1.0, rel=1e-15)
    assert relative == absolute


# -- leading eigenvalue ------------------------------------------------------

def test_leading_eigenvalue_matches_characteristic_polynomial():
    """2x2 grams admit a closed-form largest root to check against."""
    rng = np.random.default_rng(9)
    for _ in range(20):
        B = rng.standard_normal((int(rng.integers(1, 6)), 2))
        gram = B.T @ B
        a, b, c = gram[0, 0], gram[0, 1], gram[1, 1]
        ref = 0.5 * (a + c) + np.sqrt(0.25 * (a - c) ** 2 + b * b)
        assert leading_eigenvalue(B) == pytest.approx(ref, rel=1e-10)


def test_leading_eigenvalue_diagonal_and_zero():
    B = np.diag([1.0, 3.0, 2.0])
    assert leading_eigenvalue(B) == pytest.approx(9.0, rel=1e-12)
    assert leading_eigenvalue(np.zeros((3, 3))) == 0.0


# -- concave quadratic components --------------------------------------------

def test_concave_quadratic_hand_values():
    comp = ConcaveQuadratic(np.array([[1.0, 0.0], [0.0, 2.0]]))
    x = np.array([1.0, 1.0])
    assert comp.value(x) == pytest.approx(-2.5, rel=1e-15)
    np.testing.assert_allclose(comp.gradient(x), [-1.0, -4.0], rtol=1e-15)
    assert comp.lipschitz == pytest.approx(4.0, rel=1e-10)
    assert comp.curvature == "concave"
    assert not comp.degenerate


def test_concave_quadratic_gradient_matches_finite_differences():
    rng = np.random.default_rng(15)
    comp = ConcaveQuadratic(rng.standard_normal((5, 4)))
    for _ in range(3):
        x = rng.standard_normal(4) * 0.5
        np.testing.assert_allclose(
            comp.gradient(x), finite_difference_gradient(comp.value, x),
            rtol=1e-5, atol=1e-7)


def test_concave_quadratic_degenerate_zero_data():
    comp = ConcaveQuadratic(np.zeros((3, 2)))
    assert comp.degenerate
    assert comp.lipschitz > 0.0  # floored so stepsize rules stay finite


def test_penalized_argmin_solves_the_linear_system():
    rng = np.random.default_rng(22)
    comp = ConcaveQuadratic(rng.standard_normal((6, 3)))
    rho = 1.5 * comp.lipschitz + 1.0
    x_master = rng.standard_normal(3)
    y = rng.standard_normal(3)
    ref = np.linalg.solve(rho * np.eye(3) - comp.gram, rho * x_master - y)
    np.testing.assert_allclose(comp.penalized_argmin(rho, x_master, y), ref,
                               rtol=1e-10)


def test_penalized_argmin_scalar_hand_value():
    # (rho - Q) x_k = rho x' - y with Q=1, rho=8, x'=1, y=0 gives 8/7
    comp = ConcaveQuadratic(np.array([[1.0]]))
    out = comp.penalized_argmin(8.0, np.array([1.0]), np.array([0.0]))
    assert out[0] == pytest.approx(8.0 / 7.0, rel=1e-14)


def test_penalized_argmin_rejects_small_rho():
    comp = ConcaveQuadratic(np.array([[1.0]]))
    with pytest.raises(ValueError):
        comp.penalized_argmin(0.9, np.array([1.0]), np.array([0.0]))


def test_callable_cost_wraps_functions():
    comp = CallableCost(lambda x: float(x @ x), lambda x: 2.0 * x,
                        dim=3, lipschitz=2.0, curvature="convex")
    x = np.array([1.0, -1.0, 2.0])
    assert comp.value(x) == 6.0
    np.testing.assert_array_equal(comp.gradient(x), 2.0 * x)


# -- generated instances pass the spot checks --------------------------------

def test_benchmark_instance_gradient_and_lipschitz_probes():
    spec = SparsePcaSpec(dim=10, num_components=3, rows=8, seed=5)
    problem = generate(spec)
    check_gradients(problem, seed=0, points=3)
    check_lipschitz(problem, seed=0, pairs=100)


def test_consensus_problem_validation():
    comp = ConcaveQuadratic(np.array([[1.0]]))
    with pytest.raises(ValueError):
        ConsensusProblem([], l1_weight=0.0)
    with pytest.raises(ValueError):
        ConsensusProblem([comp], l1_weight=-0.5)
    with pytest.raises(ValueError):
        ConsensusProblem([comp], radius=0.0)
    problem = ConsensusProblem([comp, ConcaveQuadratic(np.array([[2.0]]))])
    np.testing.assert_allclose(problem.lipschitz_constants(), [1.0, 4.0])
    assert problem.curvature_classes() == ["concave", "concave"]
    assert ball_diameter(problem) == 2.0


# -- state and trace ---------------------------------------------------------

def test_initial_state_shapes_and_invariants():
    spec = SparsePcaSpec(dim=7, num_components=4, rows=5, seed=8)
    problem = generate(spec)
    state = initial_state(problem)
    assert state.iteration == 1
    np.testing.assert_array_equal(state.x, np.zeros(7))
    np.testing.assert_array_equal(state.x_local, np.zeros((4, 7)))
    np.testing.assert_array_equal(state.y, np.zeros((4, 7)))
    np.testing.assert_array_equal(state.stale_index, np.ones(4, dtype=int))
    # zero start: gradients vanish, so the dual identity holds trivially
    np.testing.assert_array_equal(state.grad_stored, np.zeros((4, 7)))
    copy = state.copy()
    copy.x[0] = 5.0
    assert state.x[0] == 0.0


def test_iteration_trace_append_and_len():
    trace = IterationTrace()
    assert len(trace) == 0
    trace.append(1.0, 0.5, 0.1, 0.2, 0.3, 1.0, 3)
    trace.append(0.9, 0.4, 0.05, 0.1, 0.15, 2.0, 2)
    assert len(trace) == 2
    assert trace.lagrangian == [1.0, 0.9]
    assert trace.collected == [3, 2]


def test_smooth_value_is_component_sum():
    spec = SparsePcaSpec(dim=5, num_components=3, rows=4, seed=11)
    problem = generate(spec)
    x = np.random.default_rng(0).standard_normal(5)
    ref = sum(c.value(x) for c in problem.components)
    assert smooth_value(problem, x) == pytest.approx(ref, rel=1e-14)
