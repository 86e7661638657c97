import math

import numpy as np
import pytest

from holder_condg.problems import (BENCHMARK_PROBLEMS, PROBLEM_NAMES, BoxBounds, HolderParams,
                                   ProblemInstance, construct_problem, estimate_holder_constant,
                                   evaluate_h, evaluate_jacobian)


def central_jacobian(p, x):
    J = np.empty((p.m, p.n))
    for j in range(p.n):
        h = 1e-5 * (1.0 + abs(x[j]))
        e = np.zeros(p.n)
        e[j] = h
        J[:, j] = (evaluate_h(p, x + e) - evaluate_h(p, x - e)) / (2 * h)
    return J


def test_roster():
    assert len(BENCHMARK_PROBLEMS) == 14
    for name in PROBLEM_NAMES:
        p = construct_problem(name)
        assert p.name == name and p.box.n == p.n


def test_unknown_problem():
    with pytest.raises(ValueError):
        construct_problem("ZDT1")


@pytest.mark.parametrize("name,n,m,lo,up", [
    ("BK1", 2, 2, -5, 10), ("JOS1", 10, 2, -100, 100), ("MAN1", 2, 2, -1, 1),
    ("IKK1", 2, 3, -50, 50), ("MGH33", 10, 10, -1, 1), ("Toi8", 3, 3, -1, 1),
])
def test_dimensions_and_boxes(name, n, m, lo, up):
    p = construct_problem(name)
    assert (p.n, p.m) == (n, m)
    assert np.all(p.box.lower == lo) and np.all(p.box.upper == up)


def test_value_examples():
    np.testing.assert_allclose(evaluate_h(construct_problem("BK1"), [0, 0]), [0, 50])
    np.testing.assert_allclose(evaluate_h(construct_problem("BK1"), [5, 5]), [50, 0])
    np.testing.assert_allclose(evaluate_h(construct_problem("JOS1"), np.zeros(10)), [0, 4])
    assert evaluate_h(construct_problem("IM1"), [1, 1])[0] == 2.0
    assert evaluate_h(construct_problem("MAN1"), [-0.6, -0.6])[0] == 0.0


def test_man3_is_half_squared_distance():
    p = construct_problem("MAN3")
    x = np.array([0.3, -0.2])
    b1, b2 = np.array([-0.6, -0.6]), np.array([-0.5, -0.5])
    np.testing.assert_allclose(evaluate_h(p, x), [0.5 * np.sum((x - b1) ** 2), 0.5 * np.sum((x - b2) ** 2)])
    assert p.holder.nu == 1.0 and p.holder.m_nu == 1.0


def test_jacobian_examples():
    np.testing.assert_allclose(evaluate_jacobian(construct_problem("BK1"), [0, 0]), [[0, 0], [-10, -10]])
    np.testing.assert_array_equal(evaluate_jacobian(construct_problem("MAN1"), [-0.6, -0.6])[0], [0, 0])


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_jacobian_matches_finite_differences(name):
    p = construct_problem(name)
    rng = np.random.default_rng(2024)
    for x in p.box.sample(rng, 50):
        J = evaluate_jacobian(p, x)
        fd = central_jacobian(p, x)
        assert np.all(np.abs(J - fd) <= 1e-7 + 1e-5 * np.abs(J)), (x, J, fd)


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_batched_evaluation_matches_pointwise(name):
    p = construct_problem(name)
    X = p.box.sample(np.random.default_rng(3), 5)
    np.testing.assert_allclose(p.value(X), np.array([p.value(x) for x in X]))
    np.testing.assert_allclose(p.jacobian(X), np.array([p.jacobian(x) for x in X]))


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_registered_holder_constant_holds(name):
    p = construct_problem(name)
    rng = np.random.default_rng(99)
    X, Y = p.box.sample(rng, 10_000), p.box.sample(rng, 10_000)
    lhs = np.linalg.norm(p.jacobian(X) - p.jacobian(Y), axis=2)
    rhs = p.holder.m_nu * np.linalg.norm(X - Y, axis=1)[:, None] ** p.holder.nu
    assert np.all(lhs <= rhs + 1e-9)


def test_man_holder_parameters():
    for name, nu in (("MAN1", 0.3), ("MAN2", 0.6)):
        h = construct_problem(name).holder
        assert h.nu == pytest.approx(nu) and h.provenance == "estimated" and h.m_nu > 0


def test_man_gradient_continuous_across_kink():
    p = construct_problem("MAN1")
    b = -0.6
    for eps in (1e-4, 1e-8, 1e-12):
        lo = evaluate_jacobian(p, [b - eps, 0.0])[0, 0]
        hi = evaluate_jacobian(p, [b + eps, 0.0])[0, 0]
        assert abs(hi - lo) <= 2.01 * eps**0.3


def test_holder_estimator_bk1():
    p = construct_problem("BK1")
    est = estimate_holder_constant(p, 1.0, samples=2000, seed=1)
    assert 2.0 <= est <= 2.2 + 1e-12


def test_holder_estimator_deterministic():
    p = construct_problem("MAN1")
    assert estimate_holder_constant(p, 0.3, seed=5) == estimate_holder_constant(p, 0.3, seed=5)


def test_holder_estimator_constant_objective():
    const = ProblemInstance("const", 2, 1, lambda x: np.zeros(x.shape[:-1] + (1,)),
                            lambda x: np.zeros(x.shape[:-1] + (1, 2)), BoxBounds.cube(0, 1, 2))
    assert estimate_holder_constant(const, 1.0, samples=100) == 0.0
    with pytest.raises(ValueError):
        HolderParams(1.0, 0.0)


def test_holder_params_validation():
    with pytest.raises(ValueError):
        HolderParams(0.0, 1.0)
    with pytest.raises(ValueError):
        HolderParams(1.5, 1.0)


def test_bk1_diameter():
    assert construct_problem("BK1").box.diameter == pytest.approx(15 * math.sqrt(2), rel=1e-15)


def test_box_validation_and_projection():
    with pytest.raises(ValueError):
        BoxBounds(np.array([1.0]), np.array([0.0]))
    box = BoxBounds.cube(-1, 1, 2)
    np.testing.assert_array_equal(box.project([3.0, -0.5]), [1.0, -0.5])
    assert box.contains([1.0 + 1e-13, 0.0]) and not box.contains([1.0 + 1e-9, 0.0])


@pytest.mark.parametrize("name", PROBLEM_NAMES)
def test_lower_bound_is_valid(name):
    p = construct_problem(name)
    X = p.box.sample(np.random.default_rng(0), 20_000)
    assert np.min(p.value(X)) >= p.h_lower - 1e-12
