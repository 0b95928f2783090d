import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from ppot.simplex import InfeasibleError, UnboundedError, simplex_max, solve_standard


def test_small_max():
    # max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3
    sol = simplex_max([3, 2], [[1, 1], [1, 3], [1, 0]], [4, 6, 3])
    assert sol.value == pytest.approx(11)
    np.testing.assert_allclose(sol.x, [3, 1], atol=1e-12)


def test_phase_one_and_duals():
    A = np.array([[1.0, 1, 1, 0], [1, -1, 0, 1]])
    b = np.array([2.0, 1])
    c = np.array([-1.0, -2, 0, 0])
    sol = solve_standard(c, A, b)
    assert sol.value == pytest.approx(-4)
    # strong duality
    assert sol.duals @ b == pytest.approx(sol.value)


def test_unbounded():
    with pytest.raises(UnboundedError):
        simplex_max([1, 1], [[1, -1]], [1])


def test_infeasible():
    with pytest.raises(InfeasibleError):
        solve_standard([1, 1], [[1, 1]], [-1])


def test_degenerate_problem_terminates():
    # classic cycling example for the textbook largest-coefficient rule
    c = [10, -57, -9, -24]
    A = [[0.5, -5.5, -2.5, 9], [0.5, -1.5, -0.5, 1], [1, 0, 0, 0]]
    sol = simplex_max(c, A, [0, 0, 1])
    assert sol.value == pytest.approx(1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(2, 8))
def test_random_lps_match_reference(seed, n, m):
    rng = np.random.default_rng(seed)
    A = rng.uniform(0, 1, size=(m, n))
    b = rng.uniform(1, 2, size=m)
    c = rng.normal(size=n)
    ref = linprog(-c, A_ub=A, b_ub=b, bounds=(0, None))
    sol = simplex_max(c, A, b)
    assert sol.value == pytest.approx(-ref.fun, rel=1e-9, abs=1e-9)
    assert np.all(A @ sol.x <= b + 1e-9) and np.all(sol.x >= -1e-12)


def test_perturbed_solve_matches_exact():
    rng = np.random.default_rng(7)
    A = rng.normal(size=(4, 10))
    x0 = np.zeros(10)
    x0[:2] = 1.0
    b = A @ x0
    c = rng.uniform(0.5, 1.5, size=10)
    plain = solve_standard(c, A, b)
    pert = solve_standard(c, A, b, perturb=1e-8)
    assert pert.value == pytest.approx(plain.value, rel=1e-10)
    np.testing.assert_allclose(A @ pert.x, b, atol=1e-10)
